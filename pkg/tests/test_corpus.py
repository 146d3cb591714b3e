import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atas.corpus import (
    CorpusError, DomainTooLarge, DuplicateId, GenerationProfile, MissingManifest, ProblemSpec,
    ProfileInfeasible, SpecParseError, builtin_problems, generate_corpus, load_corpus, oracle_label,
    parse_spec_text, write_corpus,
)
from atas.corpus import mutate
from atas.labels import Label
from atas.minilang import parse, render

SQUARE_REF = "read(n);\nprint(n * n);\n"


def _spec(name="square", ref=SQUARE_REF, lo=1, hi=1000):
    return ProblemSpec(name, (("n", lo, hi),), "int", parse(ref))


def _write(tmp_path, files, manifest):
    (tmp_path / "problem.spec").write_text("name square\noutput int\ninputs\nn 1 1000\n")
    (tmp_path / "reference.mc").write_text(SQUARE_REF)
    for name, text in files.items():
        (tmp_path / name).write_text(text)
    (tmp_path / "manifest.txt").write_text(manifest)


# -- loading -----------------------------------------------------------------------

def test_load_prunes_unparseable(tmp_path):
    _write(tmp_path, {"a.mc": SQUARE_REF, "b.mc": "read(n); print(n *);", "c.mc": "read(n); print(n*n*n);"},
           "s1\t30\ta.mc\ns2\t10\tb.mc\ns3\t20\tc.mc\tincorrect\n")
    log = []
    spec, subs = load_corpus(tmp_path, log)
    assert spec.name == "square"
    assert [s.id for s in subs] == ["s3", "s1"]
    assert [sid for sid, _ in log] == ["s2"]
    assert subs[0].external_verdict is Label.INCORRECT and subs[1].external_verdict is None


def test_load_prunes_wrong_arity(tmp_path):
    _write(tmp_path, {"a.mc": "read(a); read(b); print(a);"}, "s1\t1\ta.mc\n")
    log = []
    assert load_corpus(tmp_path, log)[1] == [] and len(log) == 1


def test_duplicate_id(tmp_path):
    _write(tmp_path, {"a.mc": SQUARE_REF}, "s1\t1\ta.mc\ns1\t2\ta.mc\n")
    with pytest.raises(DuplicateId):
        load_corpus(tmp_path)


def test_empty_manifest(tmp_path):
    _write(tmp_path, {}, "")
    assert load_corpus(tmp_path)[1] == []


def test_missing_manifest(tmp_path):
    _write(tmp_path, {}, "")
    (tmp_path / "manifest.txt").unlink()
    with pytest.raises(MissingManifest):
        load_corpus(tmp_path)


@pytest.mark.parametrize("manifest", ["s1\t1\n", "s1\tsoon\ta.mc\n", "s1\t1\ta.mc\tmaybe\n", "s1\t1\tzz.mc\n"])
def test_bad_manifest_lines(tmp_path, manifest):
    _write(tmp_path, {"a.mc": SQUARE_REF}, manifest)
    with pytest.raises(CorpusError):
        load_corpus(tmp_path)


@pytest.mark.parametrize("text", [
    "name sq\noutput int\n",
    "name sq\noutput float\ninputs\nn 1 2\n",
    "name sq\noutput int\ninputs\nn 5 1\n",
    "name sq\noutput int\ninputs\nn one 2\n",
    "name sq\noutput int\ninputs\nn 1 2\nm 1 2\n",
    "name sq\noutput str\ninputs\nn 1 2\n",
    "title sq\n",
])
def test_spec_parse_errors(text):
    with pytest.raises(SpecParseError):
        parse_spec_text(text, parse(SQUARE_REF))


def test_spec_comments_and_blank_lines():
    spec = parse_spec_text("# a problem\nname sq\n\noutput int  # kind\ninputs\nn 1 9\n", parse(SQUARE_REF))
    assert spec.inputs == (("n", 1, 9),) and spec.domain.size == 9


def test_builtin_problems_present():
    probs = builtin_problems()
    assert {"square", "watermelon", "game_with_sticks", "soldier_and_bananas", "buy_a_shovel",
            "buttons"} <= set(probs)
    assert probs["watermelon"].output == "str"


# -- generation ---------------------------------------------------------------------

def test_generation_counts_and_layout():
    subs = generate_corpus(_spec(), GenerationProfile(count=10, correct_fraction=0.5), rng_seed=1)
    assert len(subs) == 10
    assert sum(s.external_verdict is Label.CORRECT for s in subs) == 5
    assert [s.id for s in subs] == [f"s{i:05d}" for i in range(10)]
    ts = [s.timestamp for s in subs]
    assert ts[0] > 1_600_000_000 and all(b - a in range(1, 121) for a, b in zip(ts, ts[1:]))
    for s in subs:
        assert parse(s.source) == s.program and render(s.program) == s.source


def test_generation_is_reproducible():
    spec = builtin_problems()["game_with_sticks"]
    prof = GenerationProfile(count=40, correct_fraction=0.6, clusters=4, noise=0.3)
    assert generate_corpus(spec, prof, 7) == generate_corpus(spec, prof, 7)
    assert generate_corpus(spec, prof, 7) != generate_corpus(spec, prof, 8)


def test_decile_profile():
    prof = GenerationProfile(count=100, decile_correct=(1.0,) * 5 + (0.0,) * 5, clusters=2)
    subs = generate_corpus(_spec(), prof, 3)
    assert all(s.external_verdict is Label.CORRECT for s in subs[:50])
    assert all(s.external_verdict is Label.INCORRECT for s in subs[50:])


@pytest.mark.parametrize("prof", [
    GenerationProfile(count=0),
    GenerationProfile(count=10, correct_fraction=1.5),
    GenerationProfile(count=4, correct_fraction=0.5, clusters=3),
    GenerationProfile(count=10, bug_weights={"nonsense": 1.0}),
    GenerationProfile(count=10, decile_correct=(0.5,) * 9),
])
def test_infeasible_profiles(prof):
    with pytest.raises(ProfileInfeasible):
        generate_corpus(_spec(), prof, 0)


def test_no_applicable_bug_is_infeasible():
    spec = ProblemSpec("c", (("n", 1, 5),), "str", parse('read(n); print("A");'))
    with pytest.raises(ProfileInfeasible):
        generate_corpus(spec, GenerationProfile(count=4, correct_fraction=0.5, clusters=1,
                                                bug_weights={"wrong_power": 1.0}), 0)


def test_written_corpus_loads_back(tmp_path):
    spec = _spec()
    subs = generate_corpus(spec, GenerationProfile(count=12), 2)
    write_corpus(tmp_path, spec, subs, SQUARE_REF)
    spec2, back = load_corpus(tmp_path)
    assert spec2 == spec
    assert [(s.id, s.timestamp, s.source, s.external_verdict) for s in back] == \
        [(s.id, s.timestamp, s.source, s.external_verdict) for s in subs]


# -- oracle ----------------------------------------------------------------------------

def test_oracle_labels_cube_incorrect():
    v = oracle_label(_spec(), parse("read(n); print(n * n * n);"))
    assert v.label is Label.INCORRECT and v.witness == (2,)


def test_oracle_boundary_outside_domain_is_correct():
    spec = _spec("t", "read(n); if (n > 5) { print(1); } else { print(0); }", 1, 3)
    bug = parse("read(n); if (n > 6) { print(1); } else { print(0); }")
    assert oracle_label(spec, bug).label is Label.CORRECT


def test_oracle_domain_cap():
    with pytest.raises(DomainTooLarge):
        oracle_label(_spec(), parse(SQUARE_REF), cap=100)


def test_oracle_counts_crash_as_incorrect():
    v = oracle_label(_spec(), parse("read(n); print(n * n + 0 / (n - 3));"))
    assert v.label is Label.INCORRECT and v.witness == (3,)


def test_preserving_catalog_keeps_every_reference_correct():
    for spec in builtin_problems().values():
        if spec.domain.size > 10**5:
            continue
        for name, fn in mutate.PRESERVING.items():
            for seed in range(3):
                out = fn(spec.reference, random.Random(seed))
                if out is not None:
                    assert oracle_label(spec, parse(render(out))).label is Label.CORRECT, (spec.name, name)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_canonical_names_identify_renamings(seed):
    ref = builtin_problems()["soldier_and_bananas"].reference
    renamed = mutate.rename_identifiers(ref, random.Random(seed))
    assert render(mutate.canonical_names(renamed)) == render(mutate.canonical_names(ref))
