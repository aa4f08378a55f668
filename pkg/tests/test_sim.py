import dataclasses
import json

import pytest

from searchparty.comms import decode_line
from searchparty.sim import (
    Simulation,
    replay,
    run_scripted,
    transcript_seed,
    triggers_from_transcript,
)


def test_canonical_run_report(canonical_report):
    r = canonical_report
    assert r.scenario == "apartment"
    assert r.seed == 7
    assert r.leader == "ugv"
    assert r.outcome == "found"
    assert r.exit_code == 0
    assert r.found_by == "ugv"
    assert r.object_location == "under-sofa"
    # the report reads the leader's store; the drone's abandoned
    # living-room sweep is recorded only on its own side
    assert r.zone_outcomes == {
        "entry-way": "searched-empty",
        "under-sofa": "object-found",
        "living-room": "unknown",
        "kitchen-counter": "unknown",
    }
    assert r.ticks == 38
    assert r.envelopes == 120
    assert r.chat_messages == 10


def test_canonical_chat_order(canonical_sim):
    chat = [(e.sender, e.addressee, e.surface)
            for e in canonical_sim.bus.log if e.channel == "chat"]
    assert chat[0] == (
        "danny", "team", "Robots, I lost my keys somewhere in the apartment.")
    senders = [c[0] for c in chat]
    assert senders.count("danny") == 3
    assert chat[-1][1] == "danny"
    assert "found your keys" in chat[-1][2]


def test_identical_runs_are_byte_equal(apartment, canonical_triggers,
                                       canonical_sim):
    again = Simulation(apartment, triggers=list(canonical_triggers))
    again.run()
    assert again.bus.encode_all() == canonical_sim.bus.encode_all()
    a, b = again.report(), canonical_sim.report()
    assert a == dataclasses.replace(b, out_dir=a.out_dir)
    assert a.rng_draws == b.rng_draws
    assert a.world_digest == b.world_digest


def test_seed_changes_leader_and_outcome_shape(apartment, canonical_triggers):
    report = run_scripted(apartment, list(canonical_triggers), seed=1)
    assert report.leader == "drone"
    assert report.outcome == "found"
    assert report.found_by == "ugv"   # only the ugv can reach under-sofa
    assert report.seed == 1


def test_artifacts_written(canonical_out, canonical_report):
    names = {p.name for p in canonical_out.iterdir()}
    assert names == {"transcript.log", "digests.csv", "bt_trace.csv",
                     "tactical_trace.csv", "knowledge-ugv.txt",
                     "knowledge-drone.txt", "report.json"}
    lines = (canonical_out / "transcript.log").read_text().splitlines()
    assert len(lines) == canonical_report.envelopes
    for line in lines:
        decode_line(line)

    digest_rows = (canonical_out / "digests.csv").read_text().splitlines()
    assert digest_rows[0] == "tick,digest"
    assert len(digest_rows) - 1 == canonical_report.ticks

    saved = json.loads((canonical_out / "report.json").read_text())
    assert saved["outcome"] == "found"
    assert saved["world_digest"] == canonical_report.world_digest
    assert saved["out_dir"] == str(canonical_out)

    bt_header = (canonical_out / "bt_trace.csv").read_text().splitlines()[0]
    assert bt_header == "tick,robot,leaf,kind,status"
    tact_header = (canonical_out
                   / "tactical_trace.csv").read_text().splitlines()[0]
    assert tact_header == "tick,robot,x,y,action,pending"


def test_knowledge_dump_records_outcome(canonical_out):
    text = (canonical_out / "knowledge-ugv.txt").read_text()
    assert "search-outcome=object-found" in text
    assert "OBJECT-LOCATED" in text
    drone = (canonical_out / "knowledge-drone.txt").read_text()
    assert "search-outcome=abandoned" in drone


def test_replay_transcript_is_byte_identical(apartment, canonical_out):
    report, original, replayed = replay(
        apartment, canonical_out / "transcript.log")
    assert replayed == original
    assert report.outcome == "found"
    assert report.ticks == 38


def test_transcript_seed_and_trigger_recovery(canonical_lines):
    assert transcript_seed(canonical_lines) == 7
    with pytest.raises(ValueError, match="no layout envelope"):
        transcript_seed([])
    triggers = triggers_from_transcript(canonical_lines, {"danny"})
    assert all(t.kind == "tick" for t in triggers)
    assert [t.at_tick for t in triggers] == sorted(t.at_tick
                                                   for t in triggers)
    assert triggers[0].text == \
        "Robots, I lost my keys somewhere in the apartment."


def test_exhausted_run(exhausted_sim):
    report = exhausted_sim.report()
    assert report.outcome == "exhausted"
    assert report.exit_code == 10
    assert set(report.zone_outcomes.values()) == {"searched-empty"}
    assert report.found_by is None
    last_chat = [e for e in exhausted_sim.bus.log if e.channel == "chat"][-1]
    assert last_chat.addressee == "danny"
    assert "could not find your keys" in last_chat.surface


def test_mismatched_percept_is_rejected(exhausted_sim):
    # the blue mug is detected during the sweep but never reported found
    thoughts = [e.surface for e in exhausted_sim.bus.log
                if e.channel == "thought"]
    assert any("does not match" in t for t in thoughts)
    assert all("grounded to" not in t for t in thoughts)


def test_timeout_when_tick_limit_hits(apartment, canonical_triggers):
    short = dataclasses.replace(apartment, tick_limit=5)
    report = run_scripted(short, list(canonical_triggers))
    assert report.outcome == "timeout"
    assert report.exit_code == 11
    assert report.ticks == 5


def test_open_scope_run_asks_about_scope(open_scope_sim):
    report = open_scope_sim.report()
    assert report.outcome == "found"
    chat = [e.surface for e in open_scope_sim.bus.log if e.channel == "chat"]
    assert "Should we keep the search inside the apartment?" in chat
    assert "No." in chat


def test_injected_chat_queue(apartment, canonical_triggers):
    sim = Simulation(apartment, triggers=list(canonical_triggers))
    sim.queue_chat("danny", "team", "Any progress?")
    sim.run_tick()
    first = [e for e in sim.bus.log if e.channel == "chat"][0]
    assert first.surface == "Any progress?"
    assert first.sender == "danny"


def test_report_counts_match_log(canonical_sim, canonical_report):
    assert canonical_report.envelopes == len(canonical_sim.bus.log)
    assert canonical_report.chat_messages == sum(
        1 for e in canonical_sim.bus.log if e.channel == "chat")
    channels = {e.channel for e in canonical_sim.bus.log}
    assert channels == {"chat", "thought", "agenda-update", "vmr", "tmr",
                        "map"}
