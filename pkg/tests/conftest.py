import pytest

import oracles
from spectroforge import AudioClip, AugmentConfig, MaskSpec

SR = 16000

_acceptance_results = []


@pytest.fixture
def base_config():
    return AugmentConfig(preset_name="lpc-swp-exp3+fep", mask=MaskSpec.none())


@pytest.fixture
def vowel_clip():
    """Steady noise-excited three-resonator vowel, half a second at 16 kHz."""
    y = oracles.synth_vowel([730, 1090, 2440], sample_rate=SR, duration_s=0.5,
                            radius=0.97, seed=13)
    return AudioClip(samples=y, sample_rate=SR, channel_count=1, source_id="vowel")


@pytest.fixture
def wav_corpus(tmp_path):
    """Directory of short voiced WAV files; returns (dir, names)."""
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    names = []
    for i in range(3):
        y = oracles.synth_vowel([600 + 60 * i, 1300 + 80 * i, 2500 + 100 * i],
                                sample_rate=SR, duration_s=0.4, radius=0.97,
                                seed=100 + i)
        name = f"utt{i:02d}.wav"
        oracles.write_wav(corpus / name, y, SR)
        names.append(name)
    return corpus, names


def record_acceptance(number, description, passed, detail=""):
    _acceptance_results.append((number, description, passed, detail))
    assert passed, f"criterion {number} ({description}) failed: {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, passed, detail in sorted(_acceptance_results):
        status = "PASS" if passed else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"[{status}] criterion {number}: {description}{suffix}")
