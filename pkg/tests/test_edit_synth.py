import numpy as np
import pytest

from acc_forge import audio_core
from acc_forge.corpus import load_base_corpus, load_event_library, sample_triples
from acc_forge.edit_synth import (
    EditOp,
    EditPair,
    read_pairs,
    render_instruction,
    render_mixed_caption,
    render_triple,
    synthesize_pairs,
    synthesize_six,
    write_pairs,
)
from acc_forge.corpus import SoundEvent
from acc_forge.errors import ArityMismatch

BIRD = SoundEvent("b", "Animals", "bird song", "b.wav", "a burst of bird song")
DOG = SoundEvent("d", "Animals", "dog", "d.wav", "a dog barking")


def test_render_instruction():
    assert render_instruction(EditOp.ADD, BIRD) == "add a burst of bird song"
    assert render_instruction(EditOp.DELETE, DOG) == "delete a dog barking"
    assert render_instruction(EditOp.REPLACE, DOG, BIRD) == "replace a dog barking with a burst of bird song"
    with pytest.raises(ArityMismatch):
        render_instruction(EditOp.REPLACE, DOG)
    with pytest.raises(ArityMismatch):
        render_instruction(EditOp.ADD, DOG, BIRD)


def test_render_mixed_caption():
    assert render_mixed_caption("A man speaks.", BIRD) == "A man speaks, with a burst of bird song"
    assert render_mixed_caption("Rain falls", DOG) == "Rain falls, with a dog barking"
    assert render_mixed_caption("Rain, with wind", DOG) == "Rain, with wind, with a dog barking"


@pytest.fixture
def triples(dataset):
    bases_path, events_path = dataset
    return sample_triples(load_base_corpus(bases_path), load_event_library(events_path), seed=3, count=4)


def test_six_pairs_structure(triples, tmp_path):
    t = triples[0]
    pairs = synthesize_six(t, seed=11, out_dir=tmp_path)
    assert [p.op for p in pairs] == [EditOp.ADD] * 2 + [EditOp.DELETE] * 2 + [EditOp.REPLACE] * 2
    add_b, add_c, del_b, del_c, rep_bc, rep_cb = pairs
    a = add_b.before_audio
    ab, ac = add_b.after_audio, add_c.after_audio
    assert (add_c.before_audio, del_b.after_audio, del_c.after_audio) == (a, a, a)
    assert del_b.before_audio == ab and del_c.before_audio == ac
    assert (rep_bc.before_audio, rep_bc.after_audio) == (ab, ac)
    assert (rep_cb.before_audio, rep_cb.after_audio) == (ac, ab)
    # A+B: Add, Delete and both Replace pairs
    refs = [x for p in pairs for x in (p.before_audio, p.after_audio)]
    assert refs.count(ab) == 4 and refs.count(ac) == 4 and refs.count(a) == 4
    assert len(set(refs)) == 3
    assert {p.id for p in pairs} == {f"{t.base.id}:{t.event_b.id}:{t.event_c.id}:{p.op.value}:{k}"
                                     for k, p in enumerate(pairs)}
    assert add_b.before_caption == t.base.caption
    assert add_b.after_caption == render_mixed_caption(t.base.caption, t.event_b)
    assert rep_bc.instruction == render_instruction(EditOp.REPLACE, t.event_b, t.event_c)


def test_caption_asymmetry(triples, tmp_path):
    for t in triples:
        pairs = synthesize_six(t, 5, tmp_path)
        for p in pairs:
            assert p.before_caption != p.after_caption
            if p.op is EditOp.ADD:
                assert p.after_caption.startswith(p.before_caption.rstrip(". "))
                assert len(p.after_caption) > len(p.before_caption.rstrip(". "))
            elif p.op is EditOp.DELETE:
                assert p.before_caption.startswith(p.after_caption.rstrip(". "))
            else:
                stem = t.base.caption.rstrip(". ") + ", with "
                assert p.before_caption.startswith(stem) and p.after_caption.startswith(stem)


def test_provenance_rerenders_bit_exact(triples, tmp_path):
    t = triples[1]
    pairs = synthesize_six(t, 99, tmp_path)
    add_b = pairs[0]
    prov = add_b.provenance
    a = audio_core.resample(audio_core.load_wav(t.base.audio_path), 16000)
    b = audio_core.resample(audio_core.load_wav(t.event_b.audio_path), 16000)
    gain = audio_core.gain_for_snr(a, b, prov.snr_db[0])
    assert gain == prov.gain[0]
    remix = audio_core.mix(a, b, audio_core.MixParams(prov.offset_seconds[0], prov.snr_db[0], gain))
    assert audio_core.encode_wav(remix)[0] == (tmp_path / add_b.after_audio).read_bytes()
    assert -5 <= prov.snr_db[0] <= 15
    assert 0 <= prov.offset_seconds[0] <= a.duration_seconds - b.duration_seconds


def test_replace_provenance_names_both_events(triples, tmp_path):
    t = triples[0]
    rep_bc, rep_cb = synthesize_six(t, 1, tmp_path)[4:]
    assert (rep_bc.provenance.event_b_id, rep_bc.provenance.event_c_id) == (t.event_b.id, t.event_c.id)
    assert (rep_cb.provenance.event_b_id, rep_cb.provenance.event_c_id) == (t.event_c.id, t.event_b.id)
    assert len(rep_bc.provenance.offset_seconds) == 2


def test_determinism(triples, tmp_path):
    one = synthesize_six(triples[2], 4, tmp_path / "one")
    two = synthesize_six(triples[2], 4, tmp_path / "two")
    assert one == two
    for p in one:
        assert (tmp_path / "one" / p.after_audio).read_bytes() == (tmp_path / "two" / p.after_audio).read_bytes()


def test_render_triple_mix_is_exact(triples):
    r = render_triple(triples[0], 8)
    start = audio_core.offset_samples(r.params_b.offset_seconds, 16000)
    b = audio_core.resample(audio_core.load_wav(triples[0].event_b.audio_path), 16000)
    expected = r.a.samples.copy()
    expected[start:start + len(b)] += r.params_b.resolved_gain * b.samples
    assert np.allclose(r.ab.samples, expected, atol=1e-12)


def test_count_law_and_parallel_order(triples, tmp_path):
    serial = synthesize_pairs(triples, 0, tmp_path / "s", parallelism=1)
    threaded = synthesize_pairs(triples, 0, tmp_path / "p", parallelism=4)
    assert len(serial) == 6 * len(triples)
    assert serial == threaded
    assert len({p.id for p in serial}) == len(serial)


def test_pair_manifest_round_trip(triples, tmp_path):
    pairs = synthesize_six(triples[0], 2, tmp_path)
    write_pairs(pairs, tmp_path / "pairs.jsonl")
    assert read_pairs(tmp_path / "pairs.jsonl") == pairs


def test_full_scale_pair_count_arithmetic():
    assert 24_750 * 6 == 148_500


def test_edit_pair_rejects_equal_captions():
    with pytest.raises(ValueError):
        EditPair("x", "Add", "a", "b", "same", "same", "add", None)
