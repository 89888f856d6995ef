import pytest
from hypothesis import HealthCheck, settings

from resoscan import synth
from resoscan.domain import SearchConfig

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# shared small corpus: 200 particles, 512 steps, pmax 12
SMALL_SPEC = dict(n_rejectable=60, n_resonant=70, n_nonresonant=70, n_steps=512, pmax=12, seed=3)


@pytest.fixture(scope="session")
def small_corpus():
    return synth.gen_corpus(synth.CorpusSpec(**SMALL_SPEC))


@pytest.fixture(scope="session")
def small_config():
    return SearchConfig(pmax=12, workers=1)
