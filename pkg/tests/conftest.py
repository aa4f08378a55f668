from pathlib import Path

import pytest

import searchparty
from searchparty.inputs import load_input_script
from searchparty.scenario import load_scenario
from searchparty.sim import Simulation

DATA = Path(searchparty.__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def apartment():
    return load_scenario(DATA / "apartment.scenario")


@pytest.fixture(scope="session")
def apartment_nokeys():
    return load_scenario(DATA / "apartment-nokeys.scenario")


@pytest.fixture(scope="session")
def canonical_triggers():
    return load_input_script(DATA / "canonical.input")


@pytest.fixture(scope="session")
def open_scope_triggers():
    return load_input_script(DATA / "open-scope.input")


@pytest.fixture(scope="session")
def canonical_sim(apartment, canonical_triggers):
    sim = Simulation(apartment, triggers=list(canonical_triggers))
    sim.run()
    return sim


@pytest.fixture(scope="session")
def canonical_report(canonical_sim):
    return canonical_sim.report()


@pytest.fixture(scope="session")
def canonical_lines(canonical_sim):
    return canonical_sim.bus.encode_all()


@pytest.fixture(scope="session")
def canonical_out(canonical_sim, tmp_path_factory):
    out = tmp_path_factory.mktemp("canonical-artifacts")
    canonical_sim.write_artifacts(out)
    return out


@pytest.fixture(scope="session")
def exhausted_sim(apartment_nokeys, canonical_triggers):
    sim = Simulation(apartment_nokeys, triggers=list(canonical_triggers))
    sim.run()
    return sim


@pytest.fixture(scope="session")
def open_scope_sim(apartment, open_scope_triggers):
    sim = Simulation(apartment, triggers=list(open_scope_triggers))
    sim.run()
    return sim
