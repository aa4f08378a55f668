import pytest

from searchparty import knowledge
from searchparty.language import (
    LanguageError,
    build_vmr,
    load_lexicon,
    normalize,
    parse_lexicon_text,
    render_thought,
    vmr_summary,
)
from searchparty.sim import Simulation


@pytest.fixture()
def agent(apartment):
    return Simulation(apartment).agents["ugv"]


def test_shipped_lexicon_shape(data_dir):
    lex = load_lexicon(data_dir / "lexicon.txt")
    assert len(lex.entries) == 16
    # two entry pairs share a generation key; the first entry wins each time
    keys = lex.generation_keys()
    assert len(keys) == 14
    assert lex.entry_for("REQUEST-ACTION",
                         "SEARCH-FOR-LOST-OBJECT").name == "search-request"
    assert lex.entry_for("INFORM", "POLARITY").name == "say-no"
    for entry in lex.entries:
        assert len(entry.matches) == 2


def test_normalize_collapses_whitespace_and_case():
    assert normalize("  Robots,\n I  LOST my keys. ") == \
        "robots, i lost my keys."


def test_parse_errors():
    with pytest.raises(LanguageError, match="no entries"):
        parse_lexicon_text("# nothing\n")
    with pytest.raises(LanguageError, match="before any"):
        parse_lexicon_text("match: hello.\n")
    with pytest.raises(LanguageError, match="no match templates"):
        parse_lexicon_text("[entry a]\nmr: INFORM X\nhuman: A.\nrobot: b.\n")
    with pytest.raises(LanguageError, match="no mr line"):
        parse_lexicon_text("[entry a]\nmatch: hi.\nhuman: A.\nrobot: b.\n")
    with pytest.raises(LanguageError, match="missing 'robot'"):
        parse_lexicon_text("[entry a]\nmatch: hi.\nmr: INFORM X\nhuman: A.\n")
    with pytest.raises(LanguageError, match="must differ"):
        parse_lexicon_text(
            "[entry a]\nmatch: hi.\nmr: INFORM X\nhuman: Hi.\nrobot: hi.\n")
    with pytest.raises(LanguageError, match="normalized lowercase"):
        parse_lexicon_text(
            "[entry a]\nmatch: Hi.\nmr: INFORM X\nhuman: A.\nrobot: b.\n")
    with pytest.raises(LanguageError, match="two mr lines"):
        parse_lexicon_text("[entry a]\nmatch: hi.\nmr: INFORM X\n"
                           "mr: INFORM Y\nhuman: A.\nrobot: b.\n")
    with pytest.raises(LanguageError, match="unknown slot kind"):
        parse_lexicon_text("[entry a]\nmatch: hi {x:mystery}.\n"
                           "mr: INFORM X\nhuman: A.\nrobot: b.\n")
    with pytest.raises(LanguageError, match="duplicate slot"):
        parse_lexicon_text("[entry a]\nmatch: {x} and {x}.\n"
                           "mr: INFORM X\nhuman: A.\nrobot: b.\n")
    with pytest.raises(LanguageError, match="bad mr assignment"):
        parse_lexicon_text("[entry a]\nmatch: hi.\nmr: INFORM X flag\n"
                           "human: A.\nrobot: b.\n")


def test_analysis_prefers_more_literal_template():
    lex = parse_lexicon_text(
        "[entry generic]\n"
        "match: status {what:word}.\n"
        "mr: INFORM GENERIC what={what}\n"
        "human: The status is {what}.\n"
        "robot: status {what}.\n"
        "[entry specific]\n"
        "match: status nominal.\n"
        "mr: INFORM SPECIFIC\n"
        "human: All systems are nominal.\n"
        "robot: status nominal.\n")
    ordered = [(e.name, t.text) for e, t in lex.candidates()]
    assert ordered[0] == ("specific", "status nominal.")


# Round-trip table: generate a surface in one register, re-analyze it, and
# check the proposition frame. Slot values use the canonical scenario's
# instance ids (KEY-1 seed, zone ids, danny).
RED = [("keychain-color", "red")]
ROUND_TRIPS = [
    ("robot", "ugv", "REQUEST-INFO", "OBJECT-TYPE", {},
     "query: object-type.", {}),
    ("human", "danny", "REQUEST-INFO", "OBJECT-TYPE", {},
     "What exactly are we looking for?", {}),
    ("human", "danny", "INFORM", "OBJECT-TYPE", {"type": "KEY"},
     "It's a key.", {"object-type": ["KEY"]}),
    ("robot", "ugv", "REQUEST-INFO", "OBJECT-FEATURES", {"object": "KEY-1"},
     "query: features of KEY-1.", {"object": ["KEY-1"]}),
    ("human", "ugv", "REQUEST-INFO", "OBJECT-FEATURES", {"object": "KEY-1"},
     "What do your keys look like?", {"object": ["KEY-1"]}),
    ("robot", "ugv", "REQUEST-INFO", "LAST-SEEN-AT", {"object": "KEY-1"},
     "query: last-seen of KEY-1.", {"object": ["KEY-1"]}),
    ("human", "ugv", "REQUEST-INFO", "LOCATION-CONSTRAINED", {},
     "Should we keep the search inside the apartment?", {}),
    ("robot", "ugv", "ACK", "ACKNOWLEDGMENT", {},
     "ack: adopting plan.", {}),
    ("human", "danny", "ACK", "ACKNOWLEDGMENT", {},
     "Okay, will do.", {}),
    ("robot", "ugv", "INFORM", "ZONE-SEARCH-OUTCOME",
     {"zone": "entry-way", "outcome": "searched-empty"},
     "status: entry way searched-empty.",
     {"zone": ["entry-way"], "outcome": ["searched-empty"]}),
    ("human", "ugv", "INFORM", "ZONE-SEARCH-OUTCOME",
     {"zone": "entry-way", "outcome": "searched-empty"},
     "The entry way came up searched-empty.",
     {"zone": ["entry-way"], "outcome": ["searched-empty"]}),
    ("robot", "ugv", "INFORM", "OBJECT-LOCATED",
     {"object": "KEY-1", "zone": "under-sofa"},
     "found: KEY-1 in under sofa.",
     {"object": ["KEY-1"], "zone": ["under-sofa"]}),
    ("human", "ugv", "INFORM", "OBJECT-LOCATED",
     {"object": "KEY-1", "zone": "under-sofa"},
     "I found your keys by the sofa!",
     {"object": ["KEY-1"], "zone": ["under-sofa"]}),
    ("human", "ugv", "INFORM", "SEARCH-EXHAUSTED", {"object": "KEY-1"},
     "We searched everywhere and could not find your keys.",
     {"object": ["KEY-1"]}),
    ("robot", "ugv", "INFORM", "SEARCH-EXHAUSTED", {"object": "KEY-1"},
     "report: search exhausted for KEY-1.", {"object": ["KEY-1"]}),
    ("human", "danny", "REQUEST-ACTION", "SEARCH-FOR-LOST-OBJECT",
     {"object": "KEY-1", "area": "apartment"},
     "Robots, I lost my keys somewhere in the apartment.",
     {"object": ["KEY-1"], "area": ["apartment"],
      "location-constrained": ["yes"]}),
    ("robot", "ugv", "REQUEST-ACTION", "PLAN-PROPOSAL",
     {"type": "KEY", "features": RED,
      "zones": ["living-room", "kitchen-counter"]},
     "proposal: search for a key (keychain-color red) in zones: "
     "living room, kitchen counter. adopt plan search-for-lost-object.",
     {"plan": ["SEARCH-FOR-LOST-OBJECT"], "object-type": ["KEY"],
      "zones": ["living-room", "kitchen-counter"],
      "keychain-color": ["red"]}),
    ("human", "ugv", "REQUEST-ACTION", "PLAN-PROPOSAL",
     {"type": "KEY", "features": RED,
      "zones": ["living-room", "kitchen-counter"]},
     "How about you two search for the key (keychain-color red) in zones: "
     "living room, kitchen counter?",
     {"plan": ["SEARCH-FOR-LOST-OBJECT"], "object-type": ["KEY"],
      "zones": ["living-room", "kitchen-counter"],
      "keychain-color": ["red"]}),
]


@pytest.mark.parametrize(
    "register,speaker,speech_act,concept,slots,surface,props",
    ROUND_TRIPS,
    ids=[f"{c[2]}-{c[3]}-{c[0]}" for c in ROUND_TRIPS])
def test_generation_analysis_round_trip(agent, register, speaker, speech_act,
                                        concept, slots, surface, props):
    rendered = agent.generator.generate(speech_act, concept, slots, register)
    assert rendered == surface
    tmr = agent.analyzer.analyze(rendered, speaker=speaker, addressee="team")
    assert not tmr.unresolved
    assert tmr.speech_act == speech_act
    assert tmr.concept == concept
    frame = agent.store.get(tmr.proposition)
    for prop, values in props.items():
        assert frame.values(prop) == values
    root = agent.store.get(tmr.root)
    assert root.first("speaker") == speaker
    assert root.first("proposition") == tmr.proposition


def test_focus_entries_round_trip_after_a_question(agent):
    # feature and last-seen answers bind to the object under discussion
    agent.analyzer.analyze("What do your keys look like?",
                           speaker="ugv", addressee="danny")
    assert agent.analyzer.focus == "KEY-1"
    told = agent.generator.generate(
        "INFORM", "OBJECT-FEATURES", {"keychain-color": "red"}, "human")
    assert told == "They're on a red keychain."
    tmr = agent.analyzer.analyze(told, speaker="danny", addressee="ugv")
    assert not tmr.unresolved
    frame = agent.store.get(tmr.proposition)
    assert frame.first("object") == "KEY-1"
    assert frame.first("keychain-color") == "red"

    seen = agent.analyzer.analyze("I last saw them near the entry way.",
                                  speaker="danny", addressee="ugv")
    assert agent.store.get(seen.proposition).first("zone") == "entry-way"


def test_focus_answer_without_antecedent_is_unresolved(agent):
    tmr = agent.analyzer.analyze("They're on a red keychain.",
                                 speaker="danny", addressee="ugv")
    assert tmr.unresolved
    assert not agent.store.get(tmr.proposition).has("object")


def test_open_request_analysis_has_no_scope_constraint(agent):
    tmr = agent.analyzer.analyze("Robots, my keys are lost.",
                                 speaker="danny", addressee="team")
    assert tmr.concept == "SEARCH-FOR-LOST-OBJECT"
    frame = agent.store.get(tmr.proposition)
    assert frame.first("object") == "KEY-1"
    assert not frame.has("location-constrained")


def test_polarity_answers(agent):
    no = agent.analyzer.analyze("No.", speaker="danny", addressee="ugv")
    assert no.concept == "POLARITY"
    assert agent.store.get(no.proposition).first("polarity") == "no"
    yes = agent.analyzer.analyze("Yes.", speaker="danny", addressee="ugv")
    assert agent.store.get(yes.proposition).first("polarity") == "yes"


def test_unknown_surface_becomes_unresolved_utterance(agent):
    tmr = agent.analyzer.analyze("Robots, please hurry.",
                                 speaker="danny", addressee="team")
    assert tmr.unresolved
    assert tmr.concept == "UNRESOLVED-UTTERANCE"
    assert tmr.speech_act == "INFORM"
    assert agent.store.exists(tmr.root)


def test_generator_errors(agent):
    with pytest.raises(LanguageError, match="no lexicon entry"):
        agent.generator.generate("INFORM", "NO-SUCH-CONCEPT", {}, "robot")
    with pytest.raises(LanguageError, match="missing"):
        agent.generator.generate("INFORM", "OBJECT-LOCATED", {}, "robot")


def test_build_vmr_and_summary(agent):
    vmr_id, percept_id = build_vmr(
        agent.store, observer="ugv", tick=12, concept="KEY",
        features={"keychain-color": "red"}, cell=(4, 8), zone_id="under-sofa")
    vmr = agent.store.get(vmr_id)
    assert vmr.space == knowledge.SCRATCH
    assert vmr.first("object-type") == "KEY"
    assert vmr.first("percept") == percept_id
    assert vmr.first("tick") == "12"
    percept = agent.store.get(percept_id)
    assert percept.space == knowledge.SCRATCH
    assert percept.first("keychain-color") == "red"
    summary = vmr_summary(agent.store, vmr_id)
    assert summary == "percept KEY at under-sofa (4,8): keychain-color=red"


def test_render_thought_formats():
    text = render_thought("vmr-mismatch", 72, vmr="VMR-1", sought="KEY-1")
    assert text == "tick 72: VMR VMR-1 does not match KEY-1"
    with pytest.raises(LanguageError):
        render_thought("musing", 1)


def test_missing_lexicon_file():
    with pytest.raises(LanguageError):
        load_lexicon("/nonexistent/lexicon.txt")
