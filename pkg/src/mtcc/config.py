"""Parameter sets and the flat key=value config file format.

Defaults reproduce the reference operating point exactly; every value can be
overridden from a config file (``section.field = value`` lines) or from CLI
flags, with flags taking precedence over the file and the file over defaults.
Unknown keys are rejected rather than ignored.
"""

import dataclasses
import math
from dataclasses import dataclass

VALID_KINDS = ("o", "f", "e", "co", "cf", "ce")


@dataclass(frozen=True)
class CylinderParams:
    """Cylinder geometry, contribution widths and validity thresholds."""

    r: float = 65.0
    n_s: int = 18
    n_d: int = 5
    sigma_s: float = 6.0
    sigma_d: float = 5.0 * math.pi / 36.0
    omega: float = 0.0
    mu_psi: float = 0.005
    tau_psi: float = 400.0
    min_vc: float = 0.20
    min_m: int = 1
    min_me: float = 0.20
    delta_theta: float = 2.0 * math.pi / 3.0
    # empty cell neighborhoods squash to psi(0) by default; set False to
    # store a hard zero instead
    empty_cell_psi: bool = True

    @property
    def delta_s(self) -> float:
        return 2.0 * self.r / self.n_s

    @property
    def delta_d(self) -> float:
        return 2.0 * math.pi / self.n_d

    @property
    def n_c(self) -> int:
        return self.n_s * self.n_s * self.n_d


@dataclass(frozen=True)
class RelaxParams:
    """Pair selection and relaxation constants for the global matcher."""

    mu_p: float = 30.0
    tau_p: float = 0.4
    min_np: int = 4
    max_np: int = 10
    w_r: float = 0.6
    mu1: float = 12.0
    tau1: float = -0.8
    mu2: float = math.pi / 12.0
    tau2: float = -30.0
    mu3: float = math.pi / 28.0
    tau3: float = -10.0
    n_rel: int = 4
    # candidate pool for relaxation: n_r = min(n_r_factor * n_p, n_a, n_b)
    n_r_factor: int = 2
    # "raw" averages the selected pairs' LSM similarities, "relaxed" the
    # post-relaxation lambda values
    score_source: str = "raw"


@dataclass(frozen=True)
class EnhancementParams:
    """Segmentation, Gabor filtering and SMQT normalization settings."""

    block_size: int = 16
    variance_threshold_ratio: float = 0.1
    smqt_levels: int = 8
    smqt_masked_only: bool = False
    gabor_kernel_radius: int = 11
    gabor_sigma: float = 4.0
    gabor_orient_bins: int = 16
    gabor_freq_bins: int = 8


@dataclass(frozen=True)
class StftParams:
    """Short-time Fourier analysis grid and filtering settings."""

    window_size: int = 14
    overlap: int = 6
    fft_size: int = 32
    freq_lo: float = 1.0 / 25.0
    freq_hi: float = 1.0 / 3.0
    root_exponent: float = 0.45
    radial_order: int = 2
    angular_order: int = 2

    @property
    def stride(self) -> int:
        return self.window_size - self.overlap


@dataclass(frozen=True)
class Config:
    cylinder: CylinderParams = CylinderParams()
    relax: RelaxParams = RelaxParams()
    enhancement: EnhancementParams = EnhancementParams()
    stft: StftParams = StftParams()
    kinds: tuple = VALID_KINDS
    workers: int = 1
    cache_dir: str = ".mtcc-cache"
    out_dir: str = "."


_SECTIONS = ("cylinder", "relax", "enhancement", "stft")


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    return str(v)


def _parse_value(text: str, target_type):
    text = text.strip()
    if target_type is bool:
        low = text.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if target_type is int:
        return int(text)
    if target_type is float:
        return float(text)
    if target_type is tuple:
        return tuple(s.strip() for s in text.split(",") if s.strip())
    return text


def config_to_text(cfg: Config) -> str:
    """Serialize a config as flat, ordered key=value lines."""
    lines = []
    for section in _SECTIONS:
        obj = getattr(cfg, section)
        for f in dataclasses.fields(obj):
            lines.append(f"{section}.{f.name} = {_format_value(getattr(obj, f.name))}")
    for f in dataclasses.fields(Config):
        if f.name in _SECTIONS:
            continue
        lines.append(f"{f.name} = {_format_value(getattr(cfg, f.name))}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str, base: Config = None) -> Config:
    """Parse key=value lines, overriding ``base`` (defaults when omitted).

    Raises ValueError on unknown keys, malformed lines or bad values.
    """
    cfg = base if base is not None else Config()
    section_fields = {
        s: {f.name: f for f in dataclasses.fields(getattr(cfg, s))} for s in _SECTIONS
    }
    top_fields = {f.name: f for f in dataclasses.fields(Config) if f.name not in _SECTIONS}
    updates = {s: {} for s in _SECTIONS}
    top_updates = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if "." in key:
            section, _, name = key.partition(".")
            if section not in section_fields or name not in section_fields[section]:
                raise ValueError(f"config line {lineno}: unknown key {key!r}")
            ftype = _field_type(section_fields[section][name])
            updates[section][name] = _parse_value(value, ftype)
        else:
            if key not in top_fields:
                raise ValueError(f"config line {lineno}: unknown key {key!r}")
            top_updates[key] = _parse_value(value, _field_type(top_fields[key]))

    parts = {}
    for s in _SECTIONS:
        obj = getattr(cfg, s)
        parts[s] = dataclasses.replace(obj, **updates[s]) if updates[s] else obj
    out = dataclasses.replace(cfg, **parts, **top_updates)
    _validate(out)
    return out


def _field_type(field):
    # dataclass fields carry the annotation as a string or a type
    t = field.type
    if isinstance(t, str):
        return {"int": int, "float": float, "bool": bool, "str": str, "tuple": tuple}[t]
    return t


def _validate(cfg: Config) -> None:
    for k in cfg.kinds:
        if k not in VALID_KINDS:
            raise ValueError(f"unknown feature kind {k!r}; valid: {VALID_KINDS}")
    if cfg.relax.score_source not in ("raw", "relaxed"):
        raise ValueError("relax.score_source must be 'raw' or 'relaxed'")
    if cfg.stft.overlap >= cfg.stft.window_size:
        raise ValueError("stft.overlap must be smaller than stft.window_size")
    if cfg.stft.freq_hi <= cfg.stft.freq_lo:
        raise ValueError("stft.freq_hi must exceed stft.freq_lo")
    if cfg.workers < 1:
        raise ValueError("workers must be >= 1")


def load_config(path, base: Config = None) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_text(fh.read(), base=base)
