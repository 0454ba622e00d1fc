"""Target-suite contracts: bug catalog, PoVs, modes, and the weird-state pair."""

import random
import struct

import pytest

from gtbench.canary import BugRegistry, Mode
from gtbench.targets import (
    BugClass,
    ExitKind,
    PovUnavailableError,
    RunMode,
    UnknownTargetError,
    bug_count,
    bug_density,
    catalog,
    list_bugs,
    make_seed,
    pov,
    run_driver,
    suite_bugs,
    target_names,
)
from gtbench.targets import chunk_parser
from gtbench.targets.kv_parser import VALUE_OVERFLOW, ZERO_LENGTH_DIV

W1 = VALUE_OVERFLOW.bug_id
W2 = ZERO_LENGTH_DIV.bug_id


# -- suite shape ------------------------------------------------------------

def test_bug_ids_unique_and_dense():
    ids = sorted(bug.bug_id for bug in suite_bugs())
    assert ids == list(range(bug_count()))


def test_suite_diversity():
    bugs = suite_bugs()
    classes = {bug.bug_class for bug in bugs}
    assert len(target_names()) >= 2
    assert len(bugs) >= 10
    assert len(classes) >= 6
    for required in (BugClass.WEIRD_STATE_PAIR, BugClass.MAGIC_VALUE,
                     BugClass.CHECKSUM_GUARDED, BugClass.SEMANTIC_INCONSISTENCY):
        assert required in classes


def test_per_target_listing():
    listing = list_bugs("chunk-parser")
    assert all(bug.target == "chunk-parser" for bug in listing.descriptors)
    ids = [bug.bug_id for bug in listing.descriptors]
    assert len(set(ids)) == len(ids)


def test_density_summaries():
    assert bug_density(6 + 5 + 7, 3) == pytest.approx(6.0)
    assert round(bug_density(118, 7), 2) == pytest.approx(16.86)
    doc = catalog()
    assert doc["density"] == pytest.approx(doc["bug_count"] / doc["target_count"])
    assert {"id", "class", "target", "detectable", "has_pov"} <= set(doc["bugs"][0])


def test_unknown_target_is_argument_error():
    with pytest.raises(UnknownTargetError):
        run_driver("no-such-target", b"anything")
    with pytest.raises(UnknownTargetError):
        list_bugs("no-such-target")


# -- seeds ------------------------------------------------------------------

@pytest.mark.parametrize("target", ["chunk-parser", "kv-parser"])
def test_seed_is_clean_and_reaches_all_canaries(target):
    outcome = run_driver(target, make_seed(target))
    assert outcome.exit.kind is ExitKind.CLEAN
    assert sum(outcome.snapshot.triggered) == 0
    for bug in list_bugs(target).descriptors:
        assert outcome.snapshot.reached[bug.bug_id] > 0, bug.name


def test_empty_input_is_clean_with_zero_counters():
    outcome = run_driver("chunk-parser", b"")
    assert outcome.exit.kind is ExitKind.CLEAN
    assert set(outcome.snapshot.reached) == {0}
    assert set(outcome.snapshot.triggered) == {0}


# -- PoVs ---------------------------------------------------------------------

def _povable_bugs():
    return [bug for bug in suite_bugs() if bug.has_pov]


@pytest.mark.parametrize("bug", _povable_bugs(), ids=lambda b: b.name)
def test_pov_triggers_exactly_its_bug_first(bug):
    outcome = run_driver(bug.target, pov(bug.bug_id))
    triggered = [i for i, t in enumerate(outcome.snapshot.triggered) if t > 0]
    assert triggered == [bug.bug_id]


@pytest.mark.parametrize("bug", _povable_bugs(), ids=lambda b: b.name)
def test_pov_fatal_replay_identifies_same_bug(bug):
    outcome = run_driver(bug.target, pov(bug.bug_id), RunMode.FATAL)
    assert outcome.exit.kind is ExitKind.FATAL_CANARY
    assert outcome.exit.bug_id == bug.bug_id
    # first (and only) triggered bug matches the exit report
    assert outcome.snapshot.triggered[bug.bug_id] >= 1
    assert sum(outcome.snapshot.triggered) == 1


def test_pov_unavailable_for_unverified_bug():
    unverified = [bug for bug in suite_bugs() if not bug.has_pov]
    assert unverified, "suite should carry at least one unverified bug"
    with pytest.raises(PovUnavailableError):
        pov(unverified[0].bug_id)


# -- marquee bugs -------------------------------------------------------------

def test_row_factor_wraps_to_zero_at_magic_width():
    assert chunk_parser.row_factor(0x55555555, 3, 8, 0) == 0
    assert chunk_parser.row_factor(0x55555555, 3, 8, 1) != 0
    assert chunk_parser.row_factor(0x55555554, 3, 8, 0) != 0


def test_magic_width_header_triggers_div_zero_bug():
    data = chunk_parser.build(
        chunk_parser.chunk(chunk_parser.HEADER_CHUNK,
                           chunk_parser.header_payload(width=0x55555555, channels=3,
                                                       bit_depth=8, interlaced=0)))
    outcome = run_driver("chunk-parser", data)
    assert outcome.snapshot.triggered[chunk_parser.ROW_FACTOR_DIV_ZERO.bug_id] == 1


def test_corrupted_header_crc_rejects_chunk_before_canary():
    data = bytearray(pov(chunk_parser.ROW_FACTOR_DIV_ZERO.bug_id))
    data[-1] ^= 0xFF  # break the header CRC
    outcome = run_driver("chunk-parser", bytes(data))
    assert outcome.snapshot.reached[chunk_parser.ROW_FACTOR_DIV_ZERO.bug_id] == 0


def test_weird_state_pair_data_flow():
    # value length 16: W1 triggers, W2's condition becomes true downstream but
    # its canary is frozen
    outcome = run_driver("kv-parser", b"k=" + b"A" * 16 + b"\n")
    assert outcome.snapshot.triggered[W1] == 1
    assert outcome.snapshot.reached[W2] == 0
    assert outcome.snapshot.triggered[W2] == 0
    # value length > 16: W1 triggers, W2 untriggered (length field overwritten
    # with non-zero garbage)
    outcome = run_driver("kv-parser", b"k=" + b"A" * 24 + b"\n")
    assert outcome.snapshot.triggered[W1] == 1
    assert outcome.snapshot.triggered[W2] == 0
    # empty value: W1 reached-not-triggered, W2 triggers
    outcome = run_driver("kv-parser", b"k=\n")
    assert outcome.snapshot.reached[W1] == 1
    assert outcome.snapshot.triggered[W1] == 0
    assert outcome.snapshot.triggered[W2] == 1


# -- modes --------------------------------------------------------------------

def test_normal_runs_to_completion_fatal_stops():
    # two trigger opportunities in one input: length-16 value then a bad line
    data = b"k=" + b"A" * 16 + b"\nbadline\n"
    normal = run_driver("kv-parser", data)
    assert normal.exit.kind is ExitKind.CLEAN
    # separator canary logged once by the first line, then frozen: the
    # bad second line neither increments it nor records its trigger
    assert normal.snapshot.reached[9] == 1
    assert normal.snapshot.triggered[9] == 0
    fatal = run_driver("kv-parser", data, RunMode.FATAL)
    assert fatal.exit.kind is ExitKind.FATAL_CANARY
    assert fatal.exit.bug_id == W1


def test_mode_consistency_on_random_inputs():
    rng = random.Random(20)
    seed = make_seed("chunk-parser")
    for _ in range(150):
        data = bytearray(seed)
        for _ in range(rng.randint(1, 8)):
            data[rng.randrange(len(data))] = rng.randrange(256)
        data = bytes(data)
        normal = run_driver("chunk-parser", data)
        fatal = run_driver("chunk-parser", data, RunMode.FATAL)
        normal_first = [i for i, t in enumerate(normal.snapshot.triggered) if t]
        if fatal.exit.kind is ExitKind.FATAL_CANARY:
            assert normal_first == [fatal.exit.bug_id]
        else:
            assert normal_first == []


def test_determinism():
    data = pov(1)
    first = run_driver("chunk-parser", data, RunMode.DETECT)
    second = run_driver("chunk-parser", data, RunMode.DETECT)
    assert first.exit == second.exit
    assert first.snapshot.reached == second.snapshot.reached
    assert first.op_counts == second.op_counts


# -- detect mode ----------------------------------------------------------------

def test_detect_mode_raises_modeled_fault_for_detectable_bugs():
    for bug in _povable_bugs():
        outcome = run_driver(bug.target, pov(bug.bug_id), RunMode.DETECT)
        if bug.detectable:
            assert outcome.exit.kind is ExitKind.MODELED_FAULT, bug.name
            assert outcome.exit.bug_id == bug.bug_id
        else:
            assert outcome.exit.kind is ExitKind.CLEAN, bug.name
            assert outcome.snapshot.triggered[bug.bug_id] >= 1


def test_detection_gap_for_semantic_bug():
    bug = chunk_parser.WIDTH_VIEW_MISMATCH
    assert not bug.detectable
    outcome = run_driver(bug.target, pov(bug.bug_id), RunMode.DETECT)
    assert outcome.exit.kind is ExitKind.CLEAN
    assert outcome.snapshot.triggered[bug.bug_id] == 1


def test_nest_limit_is_configurable():
    deep = b"{\n" * 33
    assert run_driver("kv-parser", deep).snapshot.triggered[10] == 1
    relaxed = run_driver("kv-parser", deep, nest_limit=100)
    assert relaxed.snapshot.triggered[10] == 0


def test_caller_registry_is_reused():
    reg = BugRegistry(bug_count(), Mode.NORMAL)
    run_driver("chunk-parser", pov(1), registry=reg)
    assert reg.triggered[1] == 1
    reg.reset()
    outcome = run_driver("chunk-parser", make_seed("chunk-parser"), registry=reg)
    assert sum(outcome.snapshot.triggered) == 0


def test_op_counts_populated():
    outcome = run_driver("chunk-parser", make_seed("chunk-parser"))
    assert outcome.op_counts.get("parse", 0) > 0
    assert outcome.op_counts.get("checksum", 0) > 0
    assert outcome.op_counts.get("compare", 0) > 0


def test_magic_tag_encoding_matches_constant():
    assert struct.pack("<I", chunk_parser.MAGIC_TAG) == bytes.fromhex("bebafeca")
