import pytest

from searchparty.comms import MessageBus
from searchparty.inputs import (
    REPLY,
    InputDriver,
    InputError,
    load_input_script,
    parse_input_text,
)


def test_parse_tick_and_await_triggers():
    triggers = parse_input_text(
        "# intro comment\n"
        "\n"
        "@tick 1 | team | Robots, I lost my keys.\n"
        "@await look like\\? | reply | They're on a red keychain.\n"
        "@tick 9 | ugv | Any luck?\n")
    assert [t.kind for t in triggers] == ["tick", "await", "tick"]
    assert triggers[0].at_tick == 1
    assert triggers[0].addressee == "team"
    assert triggers[1].pattern.search("what do your keys LOOK LIKE?")
    assert triggers[1].addressee == REPLY
    assert triggers[2].line == 5


def test_text_may_contain_pipes_before_the_last_two():
    # fields split on the last two pipes so regex alternation survives
    (trig,) = parse_input_text("@await yes|no | reply | Either works.\n")
    assert trig.pattern.pattern == "yes|no"
    assert trig.text == "Either works."


@pytest.mark.parametrize("line,match", [
    ("@tick 3 | team", "expected:"),
    ("@tick 3 |  | hello", "empty addressee"),
    ("@tick 3 | team | ", "empty message text"),
    ("@tick x | team | hi", "bad tick number"),
    ("@tick 0 | team | hi", "start at 1"),
    ("@tick 5 | team | hi\n@tick 4 | team | later", "goes backwards"),
    ("@tick 5 | reply | hi", "needs an @await"),
    ("@await  | reply | hi", "needs a regex"),
    ("@await ([ | reply | hi", "bad regex"),
    ("@sing 3 | team | hi", "unknown trigger '@sing'"),
])
def test_parse_errors(line, match):
    with pytest.raises(InputError, match=match):
        parse_input_text(line + "\n")


def test_missing_input_file(tmp_path):
    with pytest.raises(InputError, match="no such input script"):
        load_input_script(tmp_path / "absent.input")


def make_driver(text):
    return InputDriver(parse_input_text(text), sender="danny")


def test_tick_trigger_waits_for_its_tick():
    driver = make_driver("@tick 3 | team | hello\n")
    assert driver.step(1, []) is None
    assert driver.step(2, []) is None
    assert driver.step(3, []) == ("team", "hello")
    assert driver.exhausted
    assert driver.step(4, []) is None


def test_late_tick_trigger_fires_on_first_later_tick():
    driver = make_driver("@tick 2 | team | hello\n")
    assert driver.step(7, []) == ("team", "hello")


def test_one_trigger_per_step_in_file_order():
    driver = make_driver("@tick 1 | team | first\n@tick 1 | team | second\n")
    assert driver.step(1, []) == ("team", "first")
    assert driver.step(1, []) == ("team", "second")
    assert driver.exhausted


def test_await_matches_only_newer_foreign_chat():
    bus = MessageBus(["danny", "ugv", "drone"])
    bus.post(1, "chat", "ugv", "danny", "what do your keys look like?")
    driver = make_driver(
        "@tick 2 | team | hello\n"
        "@await look like\\? | reply | red keychain\n")
    # the question predates the @tick trigger, so the await never sees it
    assert driver.step(2, bus.log) == ("team", "hello")
    assert driver.step(3, bus.log) is None

    bus.post(3, "thought", "ugv", "ugv", "keys look like?")  # wrong channel
    bus.post(3, "chat", "danny", "team", "keys look like?")  # own message
    assert driver.step(4, bus.log) is None

    bus.post(4, "chat", "drone", "danny", "what do your keys look like?")
    assert driver.step(5, bus.log) == ("drone", "red keychain")
    assert driver.exhausted


def test_await_reply_goes_to_matched_sender_and_explicit_addressee_stays():
    bus = MessageBus(["danny", "ugv"])
    bus.post(1, "chat", "ugv", "danny", "where did you last see your keys?")
    driver = make_driver("@await last see | team | near the entry way\n")
    assert driver.step(2, bus.log) == ("team", "near the entry way")


def test_await_scan_cursor_does_not_rematch_old_messages():
    bus = MessageBus(["danny", "ugv"])
    driver = make_driver(
        "@await ping | reply | pong one\n"
        "@await ping | reply | pong two\n")
    bus.post(1, "chat", "ugv", "danny", "ping")
    assert driver.step(1, bus.log) == ("ugv", "pong one")
    # same log, no new ping: the second await must not reuse the first match
    assert driver.step(2, bus.log) is None
    bus.post(3, "chat", "ugv", "danny", "ping")
    assert driver.step(3, bus.log) == ("ugv", "pong two")


def test_shipped_canonical_script(data_dir, canonical_triggers):
    assert canonical_triggers == load_input_script(
        data_dir / "canonical.input")
    kinds = [t.kind for t in canonical_triggers]
    assert kinds[0] == "tick"
    assert "await" in kinds
