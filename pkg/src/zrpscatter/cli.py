"""Batch front-end: config-driven scans written as CSV plus a plot script.

Config files are flat INI sections (see README for the schema).  Every run
emits `<prefix>.csv` with a `#`-commented header carrying the fully resolved
config, `<prefix>_plot.py` (matplotlib script, no plotting dependency here),
and `<prefix>_warnings.txt` when any grid point raised a library warning.

Exit codes: 0 success, 1 config error, 2 runtime or physics error.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channels import Channel, ChannelSet, compute_momenta
from .multicenter import CenterSpec, multicenter_field, parity_partner
from .specfun import AngularIndex
from .twocenter import TwoCenterModel, find_poles, potential_curves
from .vibro import AdiabaticModel, ClosedChannelError, TransitionSpec, VibModel
from .zrp_core import InteractionW, PoleError, angular_amplitude, build_one_center_F

EV_PER_HARTREE = 27.211386245988

TASKS = (
    "one_center",
    "two_center_dcs",
    "two_center_ics",
    "poles",
    "curves",
    "multicenter",
)

# allowed keys per section; key patterns ending in '*' match numbered keys
_SCHEMA = {
    "task": {"type", "unit", "output"},
    "grid": {"energy_min", "energy_max", "steps", "energy"},
    "angles": {"n_polar"},
    "channels": {"count", "channel_*"},
    "interaction": {"w_*"},
    "model": {
        "alpha0",
        "alpha1",
        "c",
        "l",
        "m",
        "eta0",
        "eta1",
        "R",
        "excitation_energy",
    },
    "vib": {"R_e", "omega", "mu", "n_basis", "mode"},
    "transition": {"n", "v", "v0", "v_max"},
    "search": {"re_min", "re_max", "im_min", "im_max", "branch", "n_seeds"},
    "curve": {"R_min", "R_max", "steps", "branch", "k0_seed_re", "k0_seed_im"},
    "centers": {"count", "position_*", "radius_*", "image_*"},
}

_REQUIRED_SECTIONS = {
    "one_center": ("task", "grid", "channels", "interaction"),
    "two_center_dcs": ("task", "grid", "angles", "model", "vib", "transition"),
    "two_center_ics": ("task", "grid", "model", "vib", "transition"),
    "poles": ("task", "model", "search"),
    "curves": ("task", "model", "curve"),
    "multicenter": ("task", "grid", "channels", "interaction", "centers"),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Validated run description; energies stored in hartree internally."""

    task: str
    unit: str
    output: str
    raw: dict = field(default_factory=dict)  # resolved section -> {key: value}
    energies: np.ndarray | None = None
    n_polar: int = 0
    channels: ChannelSet | None = None
    interaction: InteractionW | None = None
    model: TwoCenterModel | None = None
    vib: VibModel | None = None
    mode: str = "literal"
    transition: dict | None = None
    search: dict | None = None
    curve: dict | None = None
    centers: list | None = None


def _to_hartree(value: float, unit: str) -> float:
    return value / EV_PER_HARTREE if unit == "eV" else value


def _from_hartree(value: float, unit: str) -> float:
    return value * EV_PER_HARTREE if unit == "eV" else value


def _check_keys(cp: configparser.ConfigParser, task: str) -> None:
    needed = _REQUIRED_SECTIONS[task]
    for sec in needed:
        if sec not in cp:
            raise ConfigError(f"missing required section [{sec}] for task {task}")
    for sec in cp.sections():
        if sec not in _SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        allowed = _SCHEMA[sec]
        patterns = [a[:-1] for a in allowed if a.endswith("*")]
        plain = {a for a in allowed if not a.endswith("*")}
        for key in cp[sec]:
            if key in plain:
                continue
            if any(key.startswith(p) for p in patterns):
                continue
            raise ConfigError(f"unknown key '{key}' in section [{sec}]")


def _getf(sec, key) -> float:
    if key not in sec:
        raise ConfigError(f"missing key '{key}' in section [{sec.name}]")
    try:
        return float(sec[key])
    except ValueError as exc:
        raise ConfigError(f"[{sec.name}] {key}: not a number: {sec[key]!r}") from exc


def _geti(sec, key) -> int:
    v = _getf(sec, key)
    if v != int(v):
        raise ConfigError(f"[{sec.name}] {key}: expected integer, got {sec[key]!r}")
    return int(v)


def _parity(sec, key) -> int:
    v = _geti(sec, key)
    if v not in (+1, -1):
        raise ConfigError(f"[{sec.name}] {key}: parity must be +1 or -1, got {v}")
    return v


def _parse_channels(cp) -> ChannelSet:
    sec = cp["channels"]
    count = _geti(sec, "count")
    chans = []
    for i in range(count):
        key = f"channel_{i}"
        if key not in sec:
            raise ConfigError(f"missing key '{key}' in section [channels]")
        parts = sec[key].split()
        if len(parts) != 5:
            raise ConfigError(
                f"[channels] {key}: expected 'label energy l m parity', got {sec[key]!r}"
            )
        label, e, l, m, p = parts
        energy = _to_hartree(float(e), cp["task"].get("unit", "hartree"))
        l, m, p = int(l), int(m), int(p)
        if p not in (+1, -1):
            raise ConfigError(f"[channels] {key}: parity must be +1 or -1, got {p}")
        if l < abs(m):
            raise ConfigError(f"[channels] {key}: l >= |m| required, got l={l} m={m}")
        chans.append(Channel(label, energy, AngularIndex(l, m), p))
    return ChannelSet(channels=tuple(chans))


def _parse_interaction(cp, cs: ChannelSet) -> InteractionW:
    sec = cp["interaction"]
    n = len(cs)
    w = np.zeros((n, n), dtype=complex)
    for key in sec:
        parts = key.split("_")
        if len(parts) != 3:
            raise ConfigError(f"[interaction] bad key '{key}': expected w_i_j")
        i, j = int(parts[1]), int(parts[2])
        if not (0 <= i < n and 0 <= j < n):
            raise ConfigError(f"[interaction] '{key}': index out of range for {n} channels")
        w[i, j] = w[j, i] = float(sec[key])
    return InteractionW(w=w, l=cs.l)


def _parse_model(cp) -> TwoCenterModel:
    sec = cp["model"]
    unit = cp["task"].get("unit", "hartree")
    return TwoCenterModel(
        alpha0=_getf(sec, "alpha0"),
        alpha1=_getf(sec, "alpha1"),
        c=_getf(sec, "c"),
        l=_geti(sec, "l"),
        m=_geti(sec, "m"),
        eta0=_parity(sec, "eta0"),
        eta1=_parity(sec, "eta1"),
        R=_getf(sec, "R"),
        excitation_energy=_to_hartree(float(sec.get("excitation_energy", "0")), unit),
    )


def _parse_vib(cp) -> tuple[VibModel, str]:
    sec = cp["vib"]
    mode = sec.get("mode", "literal")
    if mode not in ("literal", "resolved"):
        raise ConfigError(f"[vib] mode must be 'literal' or 'resolved', got {mode!r}")
    return (
        VibModel(
            R_e=_getf(sec, "R_e"),
            omega=_getf(sec, "omega"),
            mu=_getf(sec, "mu"),
            n_basis=_geti(sec, "n_basis") if "n_basis" in sec else 32,
        ),
        mode,
    )


def _parse_energy_grid(cp, unit: str) -> np.ndarray:
    sec = cp["grid"]
    if "energy" in sec:
        return np.array([_to_hartree(_getf(sec, "energy"), unit)])
    emin = _to_hartree(_getf(sec, "energy_min"), unit)
    emax = _to_hartree(_getf(sec, "energy_max"), unit)
    steps = _geti(sec, "steps")
    if steps < 1:
        raise ConfigError("[grid] steps must be >= 1")
    if not (0 < emin < emax):
        raise ConfigError("[grid] need 0 < energy_min < energy_max")
    return np.linspace(emin, emax, steps)


def _parse_centers(cp, cs: ChannelSet, w: InteractionW) -> list[CenterSpec]:
    sec = cp["centers"]
    count = _geti(sec, "count")
    centers = []
    for i in range(count):
        pk, rk = f"position_{i}", f"radius_{i}"
        if pk not in sec or rk not in sec:
            raise ConfigError(f"[centers] missing '{pk}' or '{rk}'")
        pos = np.array([float(x) for x in sec[pk].split()])
        if pos.shape != (3,):
            raise ConfigError(f"[centers] {pk}: expected 3 components")
        wi = w
        if sec.get(f"image_{i}", "false").lower() in ("1", "true", "yes"):
            wi = parity_partner(w, cs)
        centers.append(
            CenterSpec(position=pos, radius=_getf(sec, rk), channels=cs, interaction=wi)
        )
    for i in range(count):
        for j in range(i + 1, count):
            d = np.linalg.norm(centers[i].position - centers[j].position)
            if centers[i].radius + centers[j].radius > d:
                raise ConfigError(f"[centers] centers {i} and {j} overlap")
    return centers


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case-sensitive (R vs r)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc
    if "task" not in cp:
        raise ConfigError("missing required section [task]")
    task = cp["task"].get("type")
    if task not in TASKS:
        raise ConfigError(f"[task] type must be one of {TASKS}, got {task!r}")
    unit = cp["task"].get("unit")
    if unit not in ("eV", "hartree"):
        raise ConfigError(f"[task] unit must be 'eV' or 'hartree', got {unit!r}")
    _check_keys(cp, task)

    cfg = RunConfig(task=task, unit=unit, output=cp["task"].get("output", "run"))
    cfg.raw = {s: dict(cp[s]) for s in cp.sections()}

    if task in ("one_center", "multicenter"):
        cfg.channels = _parse_channels(cp)
        cfg.interaction = _parse_interaction(cp, cfg.channels)
        cfg.energies = _parse_energy_grid(cp, unit)
        if task == "multicenter":
            cfg.centers = _parse_centers(cp, cfg.channels, cfg.interaction)
    elif task in ("two_center_dcs", "two_center_ics"):
        cfg.model = _parse_model(cp)
        cfg.vib, cfg.mode = _parse_vib(cp)
        cfg.energies = _parse_energy_grid(cp, unit)
        tsec = cp["transition"]
        cfg.transition = {"n": _geti(tsec, "n"), "v0": _geti(tsec, "v0")}
        if task == "two_center_dcs":
            cfg.transition["v"] = _geti(tsec, "v")
            cfg.n_polar = _geti(cp["angles"], "n_polar")
            if cfg.n_polar < 2:
                raise ConfigError("[angles] n_polar must be >= 2")
            if len(cfg.energies) != 1:
                raise ConfigError("two_center_dcs expects a single [grid] energy")
        else:
            cfg.transition["v_max"] = _geti(tsec, "v_max")
            if cfg.transition["v_max"] >= cfg.vib.n_basis:
                raise ConfigError("[transition] v_max must be < [vib] n_basis")
        if cfg.transition["n"] not in (0, 1):
            raise ConfigError("[transition] n must be 0 or 1")
    elif task == "poles":
        cfg.model = _parse_model(cp)
        ssec = cp["search"]
        branch = ssec.get("branch")
        if branch not in ("gerade", "ungerade"):
            raise ConfigError("[search] branch must be 'gerade' or 'ungerade'")
        cfg.search = {
            "rect": (
                _getf(ssec, "re_min"),
                _getf(ssec, "re_max"),
                _getf(ssec, "im_min"),
                _getf(ssec, "im_max"),
            ),
            "branch": branch,
            "n_seeds": _geti(ssec, "n_seeds") if "n_seeds" in ssec else 12,
        }
    elif task == "curves":
        cfg.model = _parse_model(cp)
        csec = cp["curve"]
        branch = csec.get("branch")
        if branch not in ("gerade", "ungerade"):
            raise ConfigError("[curve] branch must be 'gerade' or 'ungerade'")
        steps = _geti(csec, "steps")
        rmin, rmax = _getf(csec, "R_min"), _getf(csec, "R_max")
        if not (0 < rmin < rmax) or steps < 2:
            raise ConfigError("[curve] need 0 < R_min < R_max and steps >= 2")
        cfg.curve = {
            "R": np.linspace(rmin, rmax, steps),
            "branch": branch,
            "seed": complex(_getf(csec, "k0_seed_re"), _getf(csec, "k0_seed_im")),
        }
    return cfg


# -- output helpers ----------------------------------------------------------


def _fmt(x: float) -> str:
    if isinstance(x, complex):
        raise TypeError("format real parts separately")
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _header_lines(cfg: RunConfig, mode_override: str | None) -> list[str]:
    lines = ["# zrp run output"]
    for sec in sorted(cfg.raw):
        for key in sorted(cfg.raw[sec]):
            val = cfg.raw[sec][key]
            if sec == "vib" and key == "mode" and mode_override:
                val = mode_override
            lines.append(f"# {sec}.{key} = {val}")
    if mode_override and ("vib" not in cfg.raw or "mode" not in cfg.raw.get("vib", {})):
        lines.append(f"# vib.mode = {mode_override}")
    return lines


def _write_outputs(out_dir: Path, cfg: RunConfig, mode_override, columns, rows, warns, plot_title):
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{cfg.output}.csv"
    lines = _header_lines(cfg, mode_override)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    plot_path = out_dir / f"{cfg.output}_plot.py"
    plot_path.write_text(_plot_script(csv_path.name, columns, plot_title), encoding="utf-8")

    warn_path = out_dir / f"{cfg.output}_warnings.txt"
    if warns:
        warn_path.write_text(
            "\n".join(f"row {i}: {msg}" for i, msg in warns) + "\n", encoding="utf-8"
        )
    elif warn_path.exists():
        warn_path.unlink()
    return csv_path


def _plot_script(csv_name: str, columns, title: str) -> str:
    ycols = ", ".join(repr(c) for c in columns[1:])
    return f'''"""Plot companion for {csv_name}; requires matplotlib."""
import csv

import matplotlib.pyplot as plt

with open({csv_name!r}) as fh:
    rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
header, data = rows[0], rows[1:]
x = [float(r[0]) for r in data]
for name in ({ycols},):
    idx = header.index(name)
    y = [float(r[idx]) for r in data]
    plt.plot(x, y, label=name)
plt.xlabel(header[0])
plt.legend()
plt.title({title!r})
plt.tight_layout()
plt.savefig({csv_name!r}.replace(".csv", ".png"), dpi=150)
'''


def _grid_map(fn, items, threads: int):
    """Apply fn over grid points, preserving order; capture warnings per point."""

    def wrapped(item):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                value = fn(item)
            except PoleError as exc:
                return None, [f"pole hit: {exc}"] + [str(w.message) for w in caught]
            return value, [str(w.message) for w in caught]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(wrapped, items))
    return [wrapped(it) for it in items]


# -- task runners ------------------------------------------------------------


def _run_one_center(cfg: RunConfig, threads: int):
    cs, w = cfg.channels, cfg.interaction
    nch = len(cs)

    def point(e_h: float):
        k0 = math.sqrt(2.0 * e_h)
        mom = compute_momenta(cs, k0)
        f = build_one_center_F(w, mom)
        sigma = 0.0
        for n in range(nch):
            if mom.open_channel[n]:
                sigma += 4.0 * math.pi * (mom.k[n].real / k0) * abs(f.F[n, 0]) ** 2
        return f.F, sigma

    results = _grid_map(point, list(cfg.energies), threads)
    columns = [f"energy_{cfg.unit}"]
    for i in range(nch):
        for j in range(nch):
            columns += [f"ReF_{i}{j}", f"ImF_{i}{j}"]
    columns.append("sigma_bohr2")
    rows, warns = [], []
    for idx, (e_h, (val, msgs)) in enumerate(zip(cfg.energies, results)):
        row = [_from_hartree(e_h, cfg.unit)]
        if val is None:
            row += [math.nan] * (2 * nch * nch + 1)
        else:
            fmat, sigma = val
            for i in range(nch):
                for j in range(nch):
                    row += [fmat[i, j].real, fmat[i, j].imag]
            row.append(sigma)
        rows.append(row)
        warns += [(idx, m) for m in dict.fromkeys(msgs)]
    return columns, rows, warns, "one-center amplitude"


def _run_multicenter(cfg: RunConfig, threads: int):
    cs = cfg.channels
    nch = len(cs)
    zhat = np.array([0.0, 0.0, 1.0])

    def point(e_h: float):
        k0 = math.sqrt(2.0 * e_h)
        mom = compute_momenta(cs, k0)
        fld = multicenter_field(cfg.centers, mom)
        return fld(zhat, zhat)

    results = _grid_map(point, list(cfg.energies), threads)
    columns = [f"energy_{cfg.unit}"]
    for i in range(nch):
        for j in range(nch):
            columns += [f"ReF_{i}{j}", f"ImF_{i}{j}"]
    rows, warns = [], []
    for idx, (e_h, (val, msgs)) in enumerate(zip(cfg.energies, results)):
        row = [_from_hartree(e_h, cfg.unit)]
        if val is None:
            row += [math.nan] * (2 * nch * nch)
        else:
            for i in range(nch):
                for j in range(nch):
                    row += [val[i, j].real, val[i, j].imag]
        rows.append(row)
        warns += [(idx, m) for m in dict.fromkeys(msgs)]
    return columns, rows, warns, "multi-center forward amplitude"


def _adiabatic(cfg: RunConfig, mode_override: str | None) -> AdiabaticModel:
    mode = mode_override if mode_override else cfg.mode
    return AdiabaticModel(cfg.model, cfg.vib, mode=mode)

def _run_two_center_dcs(cfg: RunConfig, threads: int, mode_override):
    ad = _adiabatic(cfg, mode_override)
    tr = TransitionSpec(
        n=cfg.transition["n"],
        v=cfg.transition["v"],
        v0=cfg.transition["v0"],
        M_n=TransitionSpec.degeneracy(cfg.model.m if cfg.transition["n"] == 1 else 0),
    )
    e_h = float(cfg.energies[0])
    mom = compute_momenta(cfg.model.channel_set(), math.sqrt(2.0 * e_h))
    thetas = np.linspace(0.0, math.pi, cfg.n_polar)

    def point(theta: float):
        return ad.dcs(tr, math.cos(theta), mom)

    results = _grid_map(point, list(thetas), threads)
    columns = ["theta_deg", "cos_theta", "dcs_bohr2_per_sr"]
    rows, warns = [], []
    for idx, (theta, (val, msgs)) in enumerate(zip(thetas, results)):
        rows.append(
            [math.degrees(theta), math.cos(theta), math.nan if val is None else val]
        )
        warns += [(idx, m) for m in dict.fromkeys(msgs)]
    return columns, rows, warns, "differential cross section"


def _run_two_center_ics(cfg: RunConfig, threads: int, mode_override):
    ad = _adiabatic(cfg, mode_override)
    n = cfg.transition["n"]
    v0 = cfg.transition["v0"]
    v_max = cfg.transition["v_max"]
    m_n = TransitionSpec.degeneracy(cfg.model.m if n == 1 else 0)
    cs = cfg.model.channel_set()

    def point(e_h: float):
        mom = compute_momenta(cs, math.sqrt(2.0 * e_h))
        out = []
        for v in range(v0, v_max + 1):
            tr = TransitionSpec(n=n, v=v, v0=v0, M_n=m_n)
            try:
                out.append(ad.ics_vib(tr, mom))
            except ClosedChannelError:
                out.append(0.0)
        return out

    results = _grid_map(point, list(cfg.energies), threads)
    columns = [f"energy_{cfg.unit}"] + [f"sigma_v{v}_bohr2" for v in range(v0, v_max + 1)]
    rows, warns = [], []
    for idx, (e_h, (val, msgs)) in enumerate(zip(cfg.energies, results)):
        row = [_from_hartree(e_h, cfg.unit)]
        row += [math.nan] * (v_max - v0 + 1) if val is None else val
        rows.append(row)
        warns += [(idx, m) for m in dict.fromkeys(msgs)]
    return columns, rows, warns, "vibrational excitation cross sections"


def _run_poles(cfg: RunConfig, threads: int):
    poles = find_poles(
        cfg.model,
        cfg.search["branch"],
        cfg.search["rect"],
        n_seeds=cfg.search["n_seeds"],
    )
    columns = ["Re_k0", "Im_k0", f"Re_E_{cfg.unit}", f"Im_E_{cfg.unit}", f"Gamma_{cfg.unit}"]
    rows = []
    for z in poles:
        e = 0.5 * z * z
        rows.append(
            [
                z.real,
                z.imag,
                _from_hartree(e.real, cfg.unit),
                _from_hartree(e.imag, cfg.unit),
                _from_hartree(-2.0 * e.imag, cfg.unit),
            ]
        )
    return columns, rows, [], "resonance poles"


def _run_curves(cfg: RunConfig, threads: int):
    points = potential_curves(
        cfg.model, cfg.curve["R"], cfg.curve["branch"], cfg.curve["seed"]
    )
    columns = ["R_bohr", "Re_k0", "Im_k0", f"Re_E_{cfg.unit}", f"Im_E_{cfg.unit}"]
    rows = [
        [
            p.R,
            p.k0.real,
            p.k0.imag,
            _from_hartree(p.energy.real, cfg.unit),
            _from_hartree(p.energy.imag, cfg.unit),
        ]
        for p in points
    ]
    return columns, rows, [], "pole energy curve"


def run_task(cfg: RunConfig, out_dir: Path, threads: int = 1, mode_override: str | None = None) -> Path:
    """Execute one task and write the CSV, plot script, and warnings sidecar."""
    if cfg.task == "one_center":
        parts = _run_one_center(cfg, threads)
    elif cfg.task == "multicenter":
        parts = _run_multicenter(cfg, threads)
    elif cfg.task == "two_center_dcs":
        parts = _run_two_center_dcs(cfg, threads, mode_override)
    elif cfg.task == "two_center_ics":
        parts = _run_two_center_ics(cfg, threads, mode_override)
    elif cfg.task == "poles":
        parts = _run_poles(cfg, threads)
    else:
        parts = _run_curves(cfg, threads)
    columns, rows, warns, title = parts
    return _write_outputs(out_dir, cfg, mode_override, columns, rows, warns, title)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="zrp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="execute a config and write CSV outputs")
    run_p.add_argument("config", type=Path)
    run_p.add_argument("--out", type=Path, default=Path("."))
    run_p.add_argument("--threads", type=int, default=1)
    run_p.add_argument("--mode", choices=("literal", "resolved"), default=None)
    val_p = sub.add_parser("validate", help="parse and validate a config")
    val_p.add_argument("config", type=Path)
    args = parser.parse_args(argv)

    try:
        text = args.config.read_text(encoding="utf-8")
        cfg = parse_config(text)
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if args.command == "validate":
        print(f"ok: task {cfg.task}")
        return 0

    try:
        csv_path = run_task(cfg, args.out, threads=args.threads, mode_override=args.mode)
    except (PoleError, ClosedChannelError, RuntimeError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    print(csv_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
