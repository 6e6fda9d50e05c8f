"""Experiment specification files.

The format is flat ``key = value`` text.  ``#`` starts a comment, blank lines
are ignored, nested settings use dotted keys (``initial.kind``), and lists are
comma-separated.  Example::

    kind = figure1
    alphas = 0.5, 0.6, 0.7
    initial.kind = cos_plus_const
    initial.a = 1
    initial.b = 1
    snapshot_times = 0, 0.5, 0.55, 0.6
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .timestepper import InitialData, Scheme, SolverConfig

__all__ = ["ConfigError", "ExperimentSpec", "KINDS", "parse_text", "load_config", "load_builtin"]

KINDS = ("run", "figure1", "figure2", "sweep", "levine", "quadcheck", "kernelcheck", "dichotomy")
SWEEP_KINDS = ("figure1", "figure2", "sweep")
PROBE_TIME = 0.6

_FLOAT_KEYS = {"alpha", "tau0", "c", "U_stop", "t_end", "L", "mu"}
_INT_KEYS = {"N", "p", "max_steps", "snapshot_every", "record_every", "Q", "M", "threads"}
_LIST_KEYS = {"alphas", "snapshot_times", "kappas", "amplitudes", "lambdas", "initial.gammas"}
_STR_KEYS = {"kind", "scheme", "output_dir", "rule", "initial.kind", "name"}
_BOOL_KEYS = {"zero_operator"}
_INITIAL_FLOATS = {"initial.a", "initial.b"}
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _LIST_KEYS | _STR_KEYS | _BOOL_KEYS | _INITIAL_FLOATS


class ConfigError(ValueError):
    """Malformed or invalid experiment specification."""


@dataclass
class ExperimentSpec:
    """A validated experiment.

    ``config`` is the base solver configuration (its alpha is the first of
    ``alphas`` for multi-run kinds).  ``extra`` holds kind-specific settings
    such as the kappa grid of ``quadcheck``.
    """

    kind: str
    config: SolverConfig
    alphas: tuple[float, ...]
    output_dir: Path
    name: str = "experiment"
    extra: dict = field(default_factory=dict)


def _parse_value(key: str, raw: str, lineno: int):
    try:
        if key in _LIST_KEYS:
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if key in _FLOAT_KEYS or key in _INITIAL_FLOATS:
            if raw.lower() in ("none", ""):
                return None
            return float(raw)
        if key in _INT_KEYS:
            f = float(raw)
            if not f.is_integer():
                raise ValueError
            return int(f)
        if key in _BOOL_KEYS:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError
    except ValueError:
        raise ConfigError(f"line {lineno}: cannot parse value {raw!r} for key '{key}'") from None
    return raw


def parse_text(text: str) -> dict:
    """Flat key -> value mapping with typed values; raises ConfigError with line numbers."""
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        out[key] = _parse_value(key, raw, lineno)
    return out


def _initial(d: dict) -> InitialData:
    kind = d.get("initial.kind", "cos_plus_const")
    try:
        if kind == "cos_plus_const":
            return InitialData(kind, (d.get("initial.a", 1.0), d.get("initial.b", 1.0)))
        if kind == "constant":
            return InitialData(kind, (d.get("initial.b", 1.0),))
        if kind == "modes":
            if "initial.gammas" not in d:
                raise ConfigError("key 'initial.gammas': required for initial.kind = modes")
            return InitialData(kind, d["initial.gammas"])
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(f"key 'initial': {err}") from None
    raise ConfigError(f"key 'initial.kind': unknown kind {kind!r}")


def _positive(d, key):
    if key in d and d[key] is not None and not d[key] > 0:
        raise ConfigError(f"key '{key}': must be positive, got {d[key]}")


def build_spec(d: dict, output_dir: str | Path | None = None) -> ExperimentSpec:
    """Validate a parsed mapping and fill defaults."""
    kind = d.get("kind", "run")
    if kind not in KINDS:
        raise ConfigError(f"key 'kind': unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    for key in ("alpha", "tau0", "c", "U_stop", "t_end", "N", "Q", "M", "L", "mu"):
        _positive(d, key)
    if "alphas" in d:
        if not d["alphas"]:
            raise ConfigError("key 'alphas': empty list")
        if any(a <= 0 for a in d["alphas"]):
            raise ConfigError("key 'alphas': every alpha must be positive")
    if "scheme" in d and d["scheme"] not in ("explicit", "implicit"):
        raise ConfigError(f"key 'scheme': expected explicit or implicit, got {d['scheme']!r}")

    default_alphas = {"figure1": (0.5, 0.6, 0.7), "figure2": (0.7, 1.1, 1.3)}
    if "alphas" in d:
        alphas = d["alphas"]
    elif "alpha" in d:
        alphas = (d["alpha"],)
    elif kind in default_alphas:
        alphas = default_alphas[kind]
    elif kind in ("run", "sweep", "levine"):
        raise ConfigError(f"key 'alpha': required for kind {kind}")
    else:
        alphas = (0.5,)
    if kind in SWEEP_KINDS and any(b <= a for a, b in zip(alphas[:-1], alphas[1:])):
        raise ConfigError("key 'alphas': must be strictly increasing")

    scheme = d.get("scheme", "implicit" if kind == "figure2" else "explicit")
    snaps = tuple(d.get("snapshot_times", ()))
    if kind in SWEEP_KINDS and PROBE_TIME not in snaps:
        snaps = snaps + (PROBE_TIME,)
    tau0 = d.get("tau0", 1e-3)
    kw = dict(
        alpha=alphas[0],
        N=d.get("N", 100),
        p=d.get("p", 2),
        tau0=tau0,
        c=d.get("c", tau0),
        scheme=Scheme(scheme),
        initial=_initial(d),
        U_stop=d.get("U_stop", 1e8),
        t_end=d.get("t_end", None),
        snapshot_times=snaps,
        zero_operator=d.get("zero_operator", False),
    )
    for key in ("max_steps", "snapshot_every", "record_every"):
        if key in d:
            kw[key] = d[key]
    try:
        config = SolverConfig(**kw)
        for a in alphas[1:]:
            config.with_(alpha=a)
    except ValueError as err:
        msg = str(err)
        key = msg.split(":", 1)[0] if ":" in msg else "config"
        raise ConfigError(f"key '{key}': {msg.split(':', 1)[-1].strip()}") from None

    if kind == "quadcheck":
        qa = d.get("alphas", tuple(round(0.1 * k, 1) for k in range(1, 10)))
        if any(not 0 < a < 1 for a in qa):
            raise ConfigError("key 'alphas': quadcheck needs 0 < alpha < 1")
        alphas = qa
    if kind == "kernelcheck" and any(not 0 < a < 1 for a in d.get("alphas", alphas)):
        raise ConfigError("key 'alphas': kernelcheck needs 0 < alpha < 1")
    if "rule" in d and d["rule"] not in ("sqrt", "lambda"):
        raise ConfigError(f"key 'rule': expected sqrt or lambda, got {d['rule']!r}")
    if kind == "dichotomy" and "amplitudes" not in d:
        raise ConfigError("key 'amplitudes': required for kind dichotomy")
    if "amplitudes" in d and any(a < 0 for a in d["amplitudes"]):
        raise ConfigError("key 'amplitudes': must be nonnegative")

    extra = {
        k: d[k]
        for k in ("kappas", "Q", "rule", "lambdas", "M", "L", "mu", "amplitudes", "threads")
        if k in d
    }
    out = Path(output_dir or d.get("output_dir", "out"))
    return ExperimentSpec(kind, config, tuple(alphas), out, d.get("name", kind), extra)


def load_config(path: str | Path, output_dir: str | Path | None = None) -> ExperimentSpec:
    """Read and validate a specification file."""
    text = Path(path).read_text()
    return build_spec(parse_text(text), output_dir)


def load_builtin(name: str, output_dir: str | Path | None = None) -> ExperimentSpec:
    """Load one of the shipped specifications (``figure1``, ``figure2``)."""
    text = resources.files("fracblow").joinpath("data", f"{name}.cfg").read_text()
    return build_spec(parse_text(text), output_dir)
