import numpy as np
import pytest

from verbprob.annotations import (
    AnnotationRecord,
    VideoMeta,
    aggregate,
    load_aggregated,
    load_records,
    majority_vote,
    to_one_hot,
    write_aggregated,
    write_records,
)
from verbprob.errors import InputFormatError
from verbprob.vocab import VerbVocabulary, load_vocabulary, save_vocabulary


def vocab_of(n):
    return VerbVocabulary(tuple(f"v{j}" for j in range(n)))


def brute_force_tally(records, size):
    """Independent per-verb tally: counts and worker sets built with plain dicts."""
    counts = {}
    workers = {}
    for rec in records:
        workers.setdefault(rec.video_id, set()).add(rec.worker_id)
        for j in rec.verbs_selected:
            counts.setdefault(rec.video_id, [0] * size)[j] += 1
    return {
        vid: np.array(counts.get(vid, [0] * size), dtype=float) / len(ws)
        for vid, ws in workers.items()
    }


def random_records(rng, n_videos=5, size=8, max_workers=12):
    records = []
    for v in range(n_videos):
        for w in range(int(rng.integers(1, max_workers))):
            k = int(rng.integers(1, size))
            picks = frozenset(rng.choice(size, size=k, replace=False).tolist())
            records.append(AnnotationRecord(f"vid{v}", f"w{w}", picks))
    return records


class TestVocabulary:
    def test_roundtrip(self, tmp_path):
        vocab = VerbVocabulary(("open", "close", "pick up"))
        save_vocabulary(tmp_path / "vocab.txt", vocab)
        assert load_vocabulary(tmp_path / "vocab.txt") == vocab
        assert vocab.index("pick up") == 2
        assert "close" in vocab

    def test_rejects_duplicates_and_empty(self):
        with pytest.raises(InputFormatError):
            VerbVocabulary(("open", "open"))
        with pytest.raises(InputFormatError):
            VerbVocabulary(("open", ""))
        with pytest.raises(InputFormatError):
            VerbVocabulary(("open",))

    def test_hash_tracks_content_and_order(self):
        a = VerbVocabulary(("x", "y"))
        b = VerbVocabulary(("y", "x"))
        assert a.content_hash != b.content_hash


class TestAggregate:
    def test_exact_halves(self):
        vocab = vocab_of(4)
        records = [
            AnnotationRecord("v", f"w{i}", frozenset({1} if i < 15 else {2}))
            for i in range(30)
        ]
        (ann,) = aggregate(records, vocab)
        assert ann.annotator_count == 30
        assert ann.distribution[1] == 0.5
        assert ann.distribution[2] == 0.5
        assert ann.distribution[0] == 0.0

    def test_single_annotator_one_hot(self):
        vocab = vocab_of(3)
        (ann,) = aggregate([AnnotationRecord("v", "w", frozenset({2}))], vocab)
        assert ann.distribution.tolist() == [0.0, 0.0, 1.0]
        assert majority_vote(ann) == 2

    def test_forty_workers_against_tally_oracle(self):
        # verb 0 chosen by 19 of 40 workers, verb 1 by 28: p = .475 / .7
        vocab = vocab_of(5)
        records = []
        for i in range(40):
            picks = set()
            if i < 19:
                picks.add(0)
            if i < 28:
                picks.add(1)
            if not picks:
                picks.add(2)
            records.append(AnnotationRecord("v", f"w{i}", frozenset(picks)))
        (ann,) = aggregate(records, vocab)
        assert ann.distribution[0] == pytest.approx(0.475)
        assert ann.distribution[1] == pytest.approx(0.7)
        oracle = brute_force_tally(records, 5)
        np.testing.assert_allclose(ann.distribution, oracle["v"])

    def test_matches_oracle_on_random_corpora(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            records = random_records(rng)
            oracle = brute_force_tally(records, 8)
            for ann in aggregate(records, vocab_of(8)):
                np.testing.assert_allclose(ann.distribution, oracle[ann.video_id])

    def test_counts_times_annotators_are_integers(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            records = random_records(rng)
            for ann in aggregate(records, vocab_of(8)):
                scaled = ann.distribution * ann.annotator_count
                assert np.all(np.abs(scaled - np.round(scaled)) < 1e-9)

    def test_total_selections_conserved(self):
        rng = np.random.default_rng(5)
        records = random_records(rng)
        total = {}
        for rec in records:
            total[rec.video_id] = total.get(rec.video_id, 0) + len(rec.verbs_selected)
        for ann in aggregate(records, vocab_of(8)):
            assert ann.distribution.sum() * ann.annotator_count == pytest.approx(
                total[ann.video_id], abs=1e-9
            )

    def test_permutation_invariant(self):
        rng = np.random.default_rng(7)
        records = random_records(rng)
        base = aggregate(records, vocab_of(8))
        for seed in range(25):
            shuffled = list(records)
            np.random.default_rng(seed).shuffle(shuffled)
            other = aggregate(shuffled, vocab_of(8))
            assert [a.video_id for a in other] == [a.video_id for a in base]
            for a, b in zip(base, other):
                assert np.array_equal(a.distribution, b.distribution)

    def test_empty_and_duplicate_errors(self):
        vocab = vocab_of(3)
        with pytest.raises(InputFormatError, match="no annotations"):
            aggregate([], vocab)
        records = [
            AnnotationRecord("v", "w", frozenset({0})),
            AnnotationRecord("v", "w", frozenset({1})),
        ]
        with pytest.raises(InputFormatError, match="'v' by worker 'w'"):
            aggregate(records, vocab)

    def test_index_out_of_range(self):
        with pytest.raises(InputFormatError, match="outside vocabulary"):
            aggregate([AnnotationRecord("v", "w", frozenset({9}))], vocab_of(3))

    def test_metadata_attached(self):
        vocab = vocab_of(3)
        meta = {"v": VideoMeta(class_label="Crack Egg", dataset_tag="kitchen")}
        (ann,) = aggregate([AnnotationRecord("v", "w", frozenset({0}))], vocab, meta)
        assert ann.class_label == "Crack Egg"
        assert ann.dataset_tag == "kitchen"

    def test_record_rejects_empty_selection(self):
        with pytest.raises(InputFormatError):
            AnnotationRecord("v", "w", frozenset())


class TestMajorityVote:
    def test_tie_breaks_to_lowest_index(self):
        vocab = vocab_of(4)
        ann = aggregate(
            [
                AnnotationRecord("v", f"w{i}", s)
                for i, s in enumerate(
                    [frozenset({0, 1, 2}), frozenset({1, 2}), frozenset({1, 2, 3})]
                )
            ],
            vocab,
        )[0]
        # p = (1/3, 1, 1, 1/3): indices 1 and 2 tie
        assert majority_vote(ann) == 1

    def test_one_hot_identity(self):
        vocab = vocab_of(6)
        for k in range(6):
            (ann,) = aggregate([AnnotationRecord("v", "w", frozenset({k}))], vocab)
            assert majority_vote(ann) == k

    def test_dominated_original_label(self):
        # press-style verbs dominate while the original label sits at 0.47
        vocab = VerbVocabulary(("compress", "press", "press down", "push", "other"))
        records = []
        for i in range(100):
            picks = set()
            if i < 47:
                picks.add(0)
            if i < 80:
                picks.add(1)
            if i < 70:
                picks.add(2)
            if i < 60:
                picks.add(3)
            if not picks:
                picks.add(4)
            records.append(AnnotationRecord("v", f"w{i}", frozenset(picks)))
        (ann,) = aggregate(records, vocab)
        winner = majority_vote(ann)
        assert ann.distribution[winner] > 0.47
        assert vocab[winner] != "compress"

    def test_all_zero_distribution_rejected(self):
        from verbprob.annotations import VideoAnnotation

        ann = VideoAnnotation("v", "", "", 1, np.zeros(4))
        with pytest.raises(InputFormatError, match="no annotated verbs"):
            majority_vote(ann)

    def test_argmax_property(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            records = random_records(rng)
            for ann in aggregate(records, vocab_of(8)):
                best = majority_vote(ann)
                assert np.all(ann.distribution[best] >= ann.distribution)


class TestOneHot:
    def test_basic(self):
        assert to_one_hot(2, vocab_of(4)).tolist() == [0, 0, 1, 0]
        assert to_one_hot(0, vocab_of(2)).tolist() == [1, 0]

    def test_out_of_range(self):
        with pytest.raises(InputFormatError):
            to_one_hot(4, vocab_of(4))
        with pytest.raises(InputFormatError):
            to_one_hot(-1, vocab_of(4))

    def test_roundtrip_with_majority(self):
        vocab = vocab_of(5)
        (ann,) = aggregate([AnnotationRecord("v", "w", frozenset({3}))], vocab)
        j = majority_vote(ann)
        assert j == 3
        assert to_one_hot(j, vocab)[j] == 1.0


class TestRecordFiles:
    def test_roundtrip(self, tmp_path):
        vocab = VerbVocabulary(("open", "close", "pick up"))
        records = [
            AnnotationRecord("a", "w1", frozenset({0, 2})),
            AnnotationRecord("a", "w2", frozenset({1})),
            AnnotationRecord("b", "w1", frozenset({2})),
        ]
        meta = {
            "a": VideoMeta("Open Door", "house"),
            "b": VideoMeta("Take Cup", "kitchen"),
        }
        path = tmp_path / "records.jsonl"
        write_records(path, records, vocab, meta)
        loaded, loaded_meta = load_records(path, vocab)
        assert loaded == records
        assert loaded_meta == meta

    def test_unknown_verb_names_verb_and_line(self, tmp_path):
        vocab = VerbVocabulary(("open", "close"))
        path = tmp_path / "records.jsonl"
        path.write_text(
            '{"video_id": "a", "worker_id": "w", "verbs": ["open"]}\n'
            '{"video_id": "b", "worker_id": "w", "verbs": ["explode"]}\n'
        )
        with pytest.raises(InputFormatError, match=r"2.*'explode'"):
            load_records(path, vocab)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "records.jsonl"
        path.write_text('{"video_id": "a", "verbs": ["open"]}\n')
        with pytest.raises(InputFormatError, match="worker_id"):
            load_records(path, VerbVocabulary(("open", "close")))

    def test_conflicting_metadata(self, tmp_path):
        path = tmp_path / "records.jsonl"
        path.write_text(
            '{"video_id": "a", "worker_id": "w1", "verbs": ["open"], "class_label": "X"}\n'
            '{"video_id": "a", "worker_id": "w2", "verbs": ["open"], "class_label": "Y"}\n'
        )
        with pytest.raises(InputFormatError, match="conflicting metadata"):
            load_records(path, VerbVocabulary(("open", "close")))


class TestAggregatedFile:
    def test_roundtrip_six_decimals(self, tmp_path):
        vocab = vocab_of(3)
        records = [
            AnnotationRecord("v", f"w{i}", frozenset({0} if i % 3 else {0, 1}))
            for i in range(7)
        ]
        annotations = aggregate(records, vocab, {"v": VideoMeta("c", "t")})
        path = tmp_path / "agg.csv"
        write_aggregated(path, annotations, vocab)
        loaded = load_aggregated(path, vocab)
        assert loaded[0].video_id == "v"
        assert loaded[0].class_label == "c"
        assert loaded[0].annotator_count == 7
        np.testing.assert_allclose(
            loaded[0].distribution, annotations[0].distribution, atol=5e-7
        )

    def test_header_mismatch(self, tmp_path):
        vocab = vocab_of(3)
        path = tmp_path / "agg.csv"
        write_aggregated(
            path, aggregate([AnnotationRecord("v", "w", frozenset({0}))], vocab), vocab
        )
        with pytest.raises(InputFormatError, match="header"):
            load_aggregated(path, vocab_of(4))
