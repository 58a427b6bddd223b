import numpy as np
import pytest

from capypipe.manifest import (
    FilterVerdict,
    Language,
    MediaKind,
    MediaRef,
    SampleRecord,
    Scenario,
)


def audio_ref(duration=1.0, rate=16000, path="a.wav"):
    return MediaRef(kind=MediaKind.AUDIO, path=path, duration=duration, sample_rate=rate)


def make_record(
    id="r1",
    scenario=Scenario.ASR,
    language=Language.ENG,
    text="hello world",
    media=None,
    **kwargs,
):
    if media is None and scenario is Scenario.ASR:
        media = (audio_ref(),)
    return SampleRecord(
        id=id,
        scenario=scenario,
        language=language,
        text=text,
        media=tuple(media or ()),
        **kwargs,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one PASS/FAIL line per release criterion, printed after the test summary
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
