import pytest

from mdwtnn.config import ConfigError, build_run_config, load_config_file, parse_config_text
from mdwtnn.noise import Fixed, PerBandUniform


def test_parse_grammar():
    text = """
    # comment
    lam = auto
    tau_n = 5   # trailing comment
    alpha = 0.2, 0.3, 0.5
    gaussian = 0.1:0.2
    """
    assert parse_config_text(text) == {"lam": "auto", "tau_n": "5", "alpha": "0.2, 0.3, 0.5",
                                       "gaussian": "0.1:0.2"}


@pytest.mark.parametrize("text", ["nonsense", "bogus = 1", "tol = 1\ntol = 2", "= 3"])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("tau_n = 5\nthreads = 2\nmax_iter = 7\ncase = 4\n")
    file_values = load_config_file(path)
    cfg = build_run_config(file_values, {"tau_n": 3.0, "max_iter": None}, env={"THREADS": "3"})
    assert cfg.solver.tau_n == 3.0
    assert cfg.solver.threads == 3
    assert cfg.solver.max_iter == 7
    assert cfg.noise.gaussian == PerBandUniform(0.1, 0.2) and cfg.noise.impulse == Fixed(0.2)
    cfg = build_run_config(file_values, {"threads": 1}, env={"THREADS": "3"})
    assert cfg.solver.threads == 1
    assert build_run_config(env={}).solver.threads == 1


def test_explicit_levels_override_case():
    cfg = build_run_config({"case": "1", "impulse": "0.05"}, env={})
    assert cfg.noise.gaussian == Fixed(0.1) and cfg.noise.impulse == Fixed(0.05)


@pytest.mark.parametrize("values", [{"rho": "0.5"}, {"alpha": "1,1"}, {"case": "9"},
                                    {"impulse": "2"}, {"peak": "0"}, {"max_iter": "x"},
                                    {"clip": "maybe"}])
def test_invalid_values(values):
    with pytest.raises(ConfigError):
        build_run_config(values, env={})


def test_snapshot_is_complete():
    d = build_run_config({"seed": "4"}, env={}, paths={"out": "o.cube"}).as_dict()
    assert d["seed"] == 4 and d["noise"]["seed"] == 4 and d["paths"] == {"out": "o.cube"}
    assert {"lam", "tau_n", "alpha", "c1", "c2", "eta", "tw_init"} <= set(d["solver"])
