"""Experiment orchestration: spec parsing, run configs, curve tables and verification suites."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from math import isfinite
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .bounds import (ber_mmse_sandwich, ber_two_look_converse, area_bound_check, h_b_inv, integral_decay_check,
                     mtilde, mtilde_reports, psi, theorem_ber_bounds)
from .channels import (ChannelError, ChannelFamily, ConstantFamily, InterpolatedFamily, SymmetricChannel,
                       bec_family, capacity_series, default_grid, degradation_check, entropy_direct,
                       entropy_series, interpolate, make_bec, make_biawgn, make_bsc, perfect_channel,
                       sandwich_report)
from .gexit import (Curve, Extended, GridTooCoarse, area_integral, bridge_reports, gexit_curve, gexit_diff_lower_bound,
                    gexit_fd, gexit_series, gij_integral_check, kink_grid, mmse_curve, SecondLook,
                    two_look_direct, two_look_entropy)
from .inference import (BitProblem, abc_distribution_check, bit_statistics, bms_linear_check, efron_stein_check,
                        exit_influence_bec, delta_resample, extrinsic, extrinsic_mmse, mc_expect,
                        variance_identity_check)
from .reports import BoundReport, equality_report, lower_report, upper_report
from .rm_code import (build_code, nesting_sets, is_invariant, puncture, rate, rate_change_bound, same_codebook)
from .series import coefficient_tail, coefficients, h_b

CSV_HEADER = ["t", "side", "H", "Hprime", "M_channel", "G", "M_extrinsic"]
SUITES = ("nesting", "channels", "identities", "gexit", "bounds")

PROFILES = {
    "default": {"exact": 1e-12, "two_look": 1e-10, "series_bsc": 1e-6, "series_bec": 1e-8, "series": 1e-8,
                "fd": 1e-5, "area": 1e-3, "slack": 1e-6, "mc_sigmas": 5.0, "hb_inv": 1e-11},
    "strict": {"exact": 1e-12, "two_look": 1e-11, "series_bsc": 1e-8, "series_bec": 1e-10, "series": 1e-10,
               "fd": 1e-6, "area": 1e-4, "slack": 1e-7, "mc_sigmas": 5.0, "hb_inv": 1e-12},
}

CODES = ((0, 2), (1, 2), (1, 3), (2, 3))
FAMILIES = ("interp(bec:0.4)", "interp(bsc:0.11)", "interp(biawgn:0.9787,8)")


class HarnessError(Exception):
    """Bad user input to the harness (exit code 2 on the command line)."""


class ChannelSpecError(HarnessError, ValueError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.text, self.position = text, position


class ConfigError(HarnessError, ValueError):
    pass


class OutputError(HarnessError, OSError):
    pass


# ---------------------------------------------------------------------------
# Channel spec strings


class _SpecParser:
    def __init__(self, text: str):
        self.text, self.pos = text, 0

    def fail(self, message: str, pos: int | None = None):
        raise ChannelSpecError(message, self.text, self.pos if pos is None else pos)

    def eat(self, token: str) -> None:
        if not self.text.startswith(token, self.pos):
            self.fail(f"expected {token!r}")
        self.pos += len(token)

    def word(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalpha():
            self.pos += 1
        if start == self.pos:
            self.fail("expected a channel name")
        return self.text[start:self.pos]

    def number(self, kind=float):
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in ",()":
            self.pos += 1
        raw = self.text[start:self.pos]
        try:
            return kind(raw), start
        except ValueError:
            self.fail(f"expected {'an integer' if kind is int else 'a number'}, got {raw!r}", start)

    def spec(self):
        start = self.pos
        name = self.word()
        if name == "interp":
            self.eat("(")
            inner_at = self.pos
            inner = self.spec()
            self.eat(")")
            if not isinstance(inner, SymmetricChannel):
                self.fail("interp needs a channel, not a family", inner_at)
            try:
                return interpolate(inner)
            except ChannelError as exc:
                self.fail(str(exc), inner_at)
        if name not in ("bec", "bsc", "biawgn"):
            self.fail(f"unknown channel {name!r}", start)
        self.eat(":")
        x, at = self.number()
        if not isfinite(x):
            self.fail("parameter must be finite", at)
        try:
            if name == "bec":
                if not 0.0 <= x <= 1.0:
                    self.fail(f"erasure probability {x} outside [0, 1]", at)
                return perfect_channel() if x == 0.0 else make_bec(x)
            if name == "bsc":
                if not 0.0 <= x <= 0.5:
                    self.fail(f"crossover probability {x} outside [0, 1/2]", at)
                return make_bsc(x)
            if x <= 0.0:
                self.fail(f"noise level {x} must be positive", at)
            bins = 64
            if self.pos < len(self.text) and self.text[self.pos] == ",":
                self.pos += 1
                bins, bat = self.number(int)
                if bins < 1:
                    self.fail("bin count must be positive", bat)
            return make_biawgn(x, bins)
        except ChannelError as exc:
            self.fail(str(exc), at)

    def parse(self):
        out = self.spec()
        if self.pos != len(self.text):
            self.fail("unexpected trailing text")
        return out


def parse_channel_spec(text: str) -> SymmetricChannel | InterpolatedFamily:
    """``bec:F | bsc:F | biawgn:F[,INT] | interp(SPEC)``; whitespace is ignored."""
    return _SpecParser("".join(str(text).split())).parse()


def family_from_spec(text: str, wrap: bool = True) -> ChannelFamily:
    """A plain channel becomes its interpolated family (``wrap``) or a constant family."""
    obj = parse_channel_spec(text)
    if isinstance(obj, SymmetricChannel):
        return interpolate(obj) if wrap else ConstantFamily(obj)
    return obj


def parse_code_spec(text: str) -> tuple[int, int]:
    try:
        r, m = (int(x) for x in str(text).split(","))
    except ValueError:
        raise HarnessError(f"code spec must be R,M; got {text!r}") from None
    if not 0 <= r <= m:
        raise HarnessError(f"need 0 <= r <= m; got r={r}, m={m}")
    return r, m


def derive_seed(root: int, label: str) -> int:
    """64-bit stream seed for one task, from the root seed and the task label."""
    digest = hashlib.blake2b(f"{int(root)}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


# ---------------------------------------------------------------------------
# Config and record


@dataclass
class RunConfig:
    r: int = 1
    m: int = 3
    channel: str = "interp(bsc:0.11)"
    grid: int = 2001
    bit: int = 0
    samples: int = 0
    seed: int = 0
    tol_profile: str = "default"
    out: str = "out"

    def __post_init__(self) -> None:
        if self.tol_profile not in PROFILES:
            raise ConfigError(f"unknown tolerance profile {self.tol_profile!r}")
        if not 0 <= self.r <= self.m:
            raise ConfigError(f"need 0 <= r <= m; got r={self.r}, m={self.m}")
        if self.grid < 3 or self.samples < 0:
            raise ConfigError("grid needs at least 3 points and samples must be non-negative")

    def format(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in fields(self))

    @classmethod
    def parse(cls, text: str, overrides: dict[str, Any] | None = None) -> "RunConfig":
        """key = value lines ('#' starts a comment); ``overrides`` win over the text."""
        types = {f.name: f.type for f in fields(cls)}
        values: dict[str, Any] = {}
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            key, val = key.strip().replace("-", "_"), val.strip()
            if not sep or key not in types:
                raise ConfigError(f"line {n}: expected key = value with a known key, got {line!r}")
            values[key] = val
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        out = {}
        for key, val in values.items():
            try:
                out[key] = int(val) if types[key] in ("int", int) else str(val)
            except ValueError:
                raise ConfigError(f"{key} must be an integer, got {val!r}") from None
        return cls(**out)

    @classmethod
    def from_file(cls, path: str | Path, overrides: dict[str, Any] | None = None) -> "RunConfig":
        return cls.parse(Path(path).read_text(), overrides)


def _plain(x):
    if isinstance(x, float) and not isfinite(x):
        return repr(x)
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return _plain(x.item())
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


@dataclass
class RunRecord:
    config: dict
    version: str
    suites: dict[str, bool]
    reports: list[dict]
    wall_time: float = 0.0
    paths: dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.suites.values())

    @property
    def max_violations(self) -> dict[str, float]:
        return {r["name"]: r["max_violation"] for r in self.reports}

    def to_json(self, timing: bool = False) -> str:
        """Sorted-key JSON; the wall time is left out unless asked for, so reruns compare equal."""
        payload = {"config": self.config, "version": self.version, "passed": self.passed,
                   "suites": self.suites, "reports": self.reports}
        if timing:
            payload["wall_time"] = self.wall_time
        return json.dumps(_plain(payload), sort_keys=True, indent=2) + "\n"


def _summaries(reports: list[BoundReport]) -> list[dict]:
    return [r.summary() for r in reports]


# ---------------------------------------------------------------------------
# Single experiment


def _output_paths(out: str | Path) -> dict[str, Path]:
    out = Path(out)
    if out.suffix == ".csv":
        stem = out.with_suffix("")
        return {"csv": out, "png": stem.with_suffix(".png"), "record": Path(f"{stem}.record.json"),
                "reports": Path(f"{stem}.reports.csv")}
    return {"csv": out / "curves.csv", "png": out / "curves.png", "record": out / "record.json",
            "reports": out / "reports.csv"}


def curve_table(code, family: ChannelFamily, i: int, n: int) -> dict[str, Any]:
    """Columns of the curve CSV; the kink appears twice with sides '-' and '+'."""
    grid, sides = kink_grid(family, n)
    st = bit_statistics(code, family, i)
    sd = [s or None for s in sides]
    return {
        "t": grid,
        "side": list(sides),
        "H": np.array([family.H(t) for t in grid]),
        "Hprime": np.array([family.Hprime(t, s) for t, s in zip(grid, sd)]),
        "M_channel": np.array([family.M(t) for t in grid]),
        "G": np.array([st.gexit(t, s) for t, s in zip(grid, sd)]),
        "M_extrinsic": np.array([st.mmse(t) for t in grid]),
    }


def format_csv(columns: dict[str, Any]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for n in range(len(columns["t"])):
        w.writerow([columns["side"][n] if k == "side" else "%.17g" % columns[k][n] for k in CSV_HEADER])
    return buf.getvalue()


def read_csv(path: str | Path) -> dict[str, Any]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out: dict[str, Any] = {k: np.array([float(r[k]) for r in rows]) for k in CSV_HEADER if k != "side"}
    out["side"] = [r["side"] for r in rows]
    return out


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def run_experiment(config: RunConfig, plot: bool = True) -> RunRecord:
    """Curve CSV, bound reports and a run record for one (code, family) pair."""
    start = time.perf_counter()
    tol = PROFILES[config.tol_profile]
    family = family_from_spec(config.channel)
    code = build_code(config.r, config.m)
    if not 0 <= config.bit < code.N:
        raise ConfigError(f"bit {config.bit} out of range for N={code.N}")
    cols = curve_table(code, family, config.bit, config.grid)
    G = Curve(cols["t"], cols["G"], cols["side"])
    area = area_integral(G)
    R = float(code.rate)
    grid = np.unique(cols["t"])
    reports = [equality_report("area_theorem", [0.0], [area], [R], tol["area"], integral=area)]
    reports += bridge_reports(code, family, config.bit, cols["t"], cols["side"], tol["exact"])
    reports += sandwich_report(family, grid, tol["exact"])
    reports += ber_mmse_sandwich(code, family, config.bit, grid, tol["exact"])
    M = Curve(cols["t"], cols["M_extrinsic"], cols["side"])
    reports.append(_monotone_report("M_ext_monotone", M, tol["exact"]))
    reports += list(area_bound_check(code, family, M, R, tol["slack"]))
    reports.append(integral_decay_check(code, family, M, tol=tol["slack"]))
    if config.samples:
        reports.append(_mc_report(code, family, 0.5, config.bit, config.samples,
                                  derive_seed(config.seed, "mc"), tol["mc_sigmas"]))
    paths = _output_paths(config.out)
    _write(paths["csv"], format_csv(cols))
    rep_buf = io.StringIO()
    w = csv.writer(rep_buf, lineterminator="\n")
    w.writerow(["name", "max_violation", "tolerance", "pass"])
    for r in reports:
        w.writerow([r.name, "%.17g" % r.max_violation, "%.17g" % r.tolerance, int(r.passed)])
    _write(paths["reports"], rep_buf.getvalue())
    if plot:
        from .plotting import plot_curves

        try:
            plot_curves(cols, paths["png"], f"RM({config.r},{config.m}), {config.channel}, bit {config.bit}",
                        family.kink)
        except OSError as exc:
            raise OutputError(f"cannot write {paths['png']}: {exc}") from exc
    record = RunRecord(asdict(config), __version__, {"experiment": all(r.passed for r in reports)},
                       _summaries(reports), time.perf_counter() - start,
                       {k: str(v) for k, v in paths.items() if k != "png" or plot})
    _write(paths["record"], record.to_json(timing=True))
    return record


def _monotone_report(name: str, curve: Curve, tol: float) -> BoundReport:
    """Violation = largest decrease between consecutive distinct grid points."""
    keep = np.concatenate([[True], np.diff(curve.grid) > 0])
    t, v = curve.grid[keep], curve.values[keep]
    return upper_report(name, t[1:], -np.diff(v), np.zeros(t.size - 1), tol)


def _mc_report(code, family, t, i, samples, seed, sigmas) -> BoundReport:
    exact = extrinsic_mmse(code, family, t, i, method="exact").value
    est = mc_expect(BitProblem(code, i, extrinsic(code, i)), family.channel_at(t), lambda f: 1.0 - f * f,
                    samples, seed)
    return upper_report("mc_calibration", [t], [abs(est.value - exact)], [sigmas * est.stderr], 0.0,
                        exact=exact, mc=est.value, stderr=est.stderr, samples=samples)


# ---------------------------------------------------------------------------
# Verification suites


def _flag(name: str, ok: bool, **notes) -> BoundReport:
    return equality_report(name, [0.0], [0.0 if ok else 1.0], [0.0], 0.0, **notes)


def _tag(reports, label: str) -> list[BoundReport]:
    out = list(reports) if isinstance(reports, (list, tuple)) else [reports]
    for r in out:
        r.name = f"{r.name} [{label}]"
    return out


def check_puncturing(tol, seed):
    rm12 = build_code(1, 2).codebook
    rm13, rm14 = build_code(1, 3), build_code(1, 4)
    out = [_flag(f"puncture RM(1,3) on {p} = RM(1,2)", same_codebook(puncture(rm13, p), rm12))
           for p in ((0, 1, 2, 3), (0, 1, 4, 5))]
    # the nesting sets of every anchor, and the two-step chain RM(1,4) -> RM(1,3) -> RM(1,2)
    ok = True
    for i in range(8):
        ns = nesting_sets(1, 3, 1, i)
        for S in (ns.I, ns.I_prime):
            ok &= same_codebook(puncture(rm14, S), rm13.codebook)
            inner = nesting_sets(1, 2, 1, i % 4)
            ok &= same_codebook(puncture(rm14, [S[j] for j in inner.I]), rm12)
    out.append(_flag("chain RM(1,4) > RM(1,3) > RM(1,2)", ok))
    return out


def check_nesting_structure(tol, seed):
    ok = True
    for r, m, k in ((1, 2, 1), (1, 3, 1), (2, 3, 1), (1, 3, 2), (2, 4, 1)):
        big = build_code(r, m + k)
        small = build_code(r, m).codebook
        for i in range(1 << m):
            ns = nesting_sets(r, m, k, i)
            T = set(ns.T)
            ok &= set(ns.I) & set(ns.I_prime) == T and ns.i in T
            ok &= len(ns.B) == len(ns.C) == len(ns.I) - len(T)
            ok &= ns.permutation[ns.i] == ns.i and is_invariant(big, ns.permutation)
            ok &= sorted(ns.permutation[j] for j in ns.I) == list(ns.I_prime)
            ok &= same_codebook(puncture(big, ns.I), small) and same_codebook(puncture(big, ns.I_prime), small)
    return [_flag("nesting sets: overlap, sizes, automorphism", ok)]


def check_rates(tol, seed):
    out = [_flag("rate(1,3) = 1/2", rate(1, 3) == Fraction(1, 2)),
           _flag("rate(2,5) = 1/2", rate(2, 5) == Fraction(1, 2))]
    gaps, bounds = [], []
    for m in range(1, 13):
        for k in range(1, min(3, m) + 1):
            for r in range(0, m + 1):
                gaps.append(float(rate(r, m) - rate(r, m + k)))
                bounds.append(rate_change_bound(m, k))
    out.append(upper_report("rate_change_bound", np.arange(len(gaps)), gaps, bounds, 0.0))
    return out


def check_capacity_series(tol, seed):
    out = []
    for p in (0.05, 0.11, 0.2, 0.4):
        val, s = capacity_series(make_bsc(p))
        out.append(equality_report(f"capacity series BSC({p})", [p], [val], [1.0 - h_b(p)], tol["series_bsc"],
                                   K=s.K))
    for e in np.linspace(0.0, 1.0, 11):
        val, s = capacity_series(make_bec(float(e)))
        out.append(equality_report(f"capacity series BEC({e:.1f})", [e], [val], [1.0 - e], tol["series_bec"],
                                   K=s.K))
    for spec in ("biawgn:0.9787,8", "biawgn:0.9787,64", "biawgn:0.5,32"):
        ch = parse_channel_spec(spec)
        out.append(equality_report(f"entropy series vs direct {spec}", [0.0], [entropy_series(ch)[0]],
                                   [entropy_direct(ch)], tol["series"]))
    K = 1000
    out.append(upper_report("sum c_k = 1", [K], [abs(np.sum(coefficients(K)) - 1.0)],
                            [coefficient_tail(K)], tol["exact"]))
    return out


def check_family(spec, tol, seed):
    fam = family_from_spec(spec)
    grid = default_grid(fam, 201)
    out = sandwich_report(fam, grid, tol["exact"])
    out.append(degradation_check(fam, grid, tol=tol["exact"]))
    out.append(equality_report("M(t) = t", grid, [fam.M(t) for t in grid], grid, tol["exact"]))
    out.append(equality_report("q_k(0) = 1, q_k(1) = 0", [0.0, 1.0],
                               [max(abs(fam.q(0.0, k) - 1.0) for k in range(1, 9)),
                                max(abs(fam.q(1.0, k)) for k in range(1, 9))], [0.0, 0.0], tol["exact"]))
    if spec.startswith("interp(bec"):
        H = np.array([fam.H(t) for t in grid])
        out.append(equality_report("BEC attains M = H", grid, grid, H, tol["exact"]))
        ber = [0.5 * (1.0 - float(np.sum(c.prob * np.abs(c.tanh)))) for c in map(fam.channel_at, grid)]
        out.append(equality_report("BEC BER = MMSE/2", grid, ber, 0.5 * grid, tol["exact"]))
    return _tag(out, spec)


def check_worked_examples(tol, seed):
    fam = parse_channel_spec("interp(bsc:0.11)")
    return [equality_report("interp(bsc:0.11) M*", [0.0], [fam.mstar], [1.0 - (1.0 - 2 * 0.11) ** 2], tol["exact"])]


def check_two_look(tol, seed):
    cases = [("BSC(0.11) x BSC(0.3)", make_bsc(0.11), make_bsc(0.3), 0.0),
             ("BSC(0.2) x BSC(0.05)", make_bsc(0.2), make_bsc(0.05), 0.0),
             ("BEC(0.3) x BSC(0.2)", make_bec(0.3), make_bsc(0.2), 0.0),
             ("BSC(0.2) x BEC(0.6)", make_bsc(0.2), make_bec(0.6), 0.0)]
    out = [equality_report(f"two-look {name}", [0.0], [two_look_entropy(y, u)], [two_look_direct(y, u, mu)],
                           tol["two_look"]) for name, y, u, mu in cases]
    for mu in (0.0, 0.3, 0.9):
        y = make_bec(0.4)
        out.append(equality_report(f"two-look BEC(0.4) prior {mu}", [mu], [two_look_entropy(y, ([mu], [1.0]))],
                                   [two_look_direct(y, None, mu)], tol["two_look"]))
    return out


def check_variance(r, m, spec, tol, seed):
    code, fam = build_code(r, m), family_from_spec(spec)
    grid = np.linspace(0.0, 1.0, 21)
    pairs = [variance_identity_check(code, fam, t, 0, extrinsic(code, 0)) for t in grid]
    return _tag(equality_report("variance identity", grid, [p[1] for p in pairs], [p[0] for p in pairs],
                                tol["exact"]), f"RM({r},{m}) {spec}")


def check_efron_stein(r, m, spec, tol, seed):
    """M(1 - M) <= Delta^B + sum over j in A of Delta^j on the code punctured to I."""
    fam = family_from_spec(spec)
    big = build_code(r, m + 1)
    grid = np.linspace(0.0, 1.0, 11)
    lhs, rhs, labels = [], [], []
    for i in (0, 3):
        ns = nesting_sets(r, m, 1, i)
        local = {p: n for n, p in enumerate(ns.I)}
        code = big.restrict(ns.I)
        parts = [[local[j] for j in ns.B]] + [[local[j]] for j in ns.A]
        for t in grid:
            a, b = efron_stein_check(code, fam, t, local[i], parts)
            lhs.append(a)
            rhs.append(b)
    return _tag(upper_report("Efron-Stein decomposition", np.arange(len(lhs)), lhs, rhs, tol["exact"]),
                f"RM({r},{m}) {spec}")


def check_abc(tol, seed):
    ns = nesting_sets(1, 3, 1, 0)
    code = build_code(1, 4)
    fam = bec_family()
    reps = [abc_distribution_check(code, ns, fam, t) for t in (0.25, 0.5, 0.75)]
    return [upper_report("ABC total variation RM(1,3) BEC", [r.t for r in reps], [r.tv for r in reps],
                         [0.0] * 3, tol["exact"])]


def check_bec_influence(tol, seed):
    code, fam = build_code(1, 3), bec_family()
    grid = np.linspace(0.0, 1.0, 21)
    out = []
    for j in (1, 2, 7):
        delta = [delta_resample(code, fam, t, 0, [j]) for t in grid]
        infl = [t * (1 - t) * exit_influence_bec(code, 0, j, t) for t in grid]
        out.append(equality_report(f"BEC influence identity j={j}", grid, delta, infl, tol["exact"]))
    return out


def check_bms_linear(tol, seed):
    a = bms_linear_check(build_code(1, 2), make_bsc(0.2), 0, [1, 2, 3])
    b = bms_linear_check(build_code(1, 3), make_bec(0.3), 2, [0, 1, 3, 4, 5, 6, 7])
    c = bms_linear_check(build_code(1, 2), make_bsc(0.2), 1, [0, 1, 2, 3])
    return [equality_report("symmetry f(y) = x_i f(x y)", [0, 1, 2], [a, b, c], [0, 0, 0], tol["exact"])]


def check_mc(tol, seed):
    fam = family_from_spec("interp(bsc:0.11)")
    return [_mc_report(build_code(1, 3), fam, 0.5, 0, 10 ** 6, derive_seed(seed, "mc RM(1,3) bsc"),
                       tol["mc_sigmas"])]


def check_gexit_fd(spec, tol, seed):
    code, fam = build_code(1, 3), family_from_spec(spec)
    h = 1e-4
    grid = np.linspace(0.02, 0.98, 50)
    grid = np.where(np.abs(grid - fam.kink) < 3 * h, grid + 6 * h, grid)
    fd = [gexit_fd(code, fam, t, 0, h) for t in grid]
    series = [gexit_series(code, fam, t, 0) for t in grid]
    return _tag(equality_report("GEXIT series vs finite difference", grid, series, fd, tol["fd"]), spec)


def check_area_theorem(r, m, spec, tol, seed):
    code, fam = build_code(r, m), family_from_spec(spec)
    val = area_integral(gexit_curve(code, fam, 0, 2001))
    return _tag(equality_report("area theorem", [0.0], [val], [float(code.rate)], tol["area"], integral=val),
                f"RM({r},{m}) {spec}")


def check_extended_gap(tol, seed):
    code, fam = build_code(1, 2), family_from_spec("interp(bsc:0.11)")
    out = []
    for f_spec in ("interp(bsc:0.11)", "interp(bec:0.4)"):
        fam = family_from_spec(f_spec)
        g = gexit_curve(code, fam, 0, 2001)
        ge = gexit_curve(code, fam, 0, 2001, Extended(1))
        val = area_integral(Curve(g.grid, g.values - ge.values, g.sides))
        out.append(equality_report(f"extended-code GEXIT gap [{f_spec}]", [0.0], [val],
                                   [float(rate(1, 2) - rate(1, 3))], tol["area"], integral=val))
    return out


def check_gij(tol, seed):
    code, fam = build_code(1, 3), bec_family()
    pairs = [(i, j) for i in range(code.N) for j in range(code.N) if i != j]
    reps = [gij_integral_check(code, fam, i, j, 2001, tol["slack"]) for i, j in pairs]
    vals = np.array([r.notes["value"] for r in reps])
    worst = max(reps, key=lambda r: r.max_violation)
    return [worst, equality_report("Gij value equal over all pairs", [0.0], [vals.max() - vals.min()], [0.0], 1e-9,
                                   value=float(vals[0]))]


def check_bridges(r, m, spec, tol, seed):
    code, fam = build_code(r, m), family_from_spec(spec)
    grid, sides = kink_grid(fam, 201)
    out = bridge_reports(code, fam, 0, grid, sides, tol["exact"])
    if spec.startswith("interp(biawgn"):
        # the second-look sweep needs 9^(N+1) patterns here, past the exhaustive budget
        return _tag(out, f"RM({r},{m}) {spec}")
    lhs, rhs = zip(*(gexit_diff_lower_bound(code, fam, t, 0, SecondLook(1)) for t in np.linspace(0.05, 0.95, 19)
                     if abs(t - fam.kink) > 1e-9))
    out.append(lower_report("G - G^+ >= c1 (-q1') mmse gap", np.arange(len(lhs)), lhs, rhs, tol["exact"]))
    return _tag(out, f"RM({r},{m}) {spec}")


def check_hb_inverse(tol, seed):
    y = np.linspace(0.0, 1.0, 1001)
    x = h_b_inv(y)
    u = np.linspace(0.0, 1.0, 1001)
    d = np.diff(psi(u))
    return [equality_report("h_b(h_b_inv(y)) = y", y, h_b(x), y, tol["hb_inv"]),
            lower_report("psi strictly increasing", u[1:], d, np.zeros_like(d), 0.0),
            equality_report("psi(0) = 0, psi(1) = 1", [0.0, 1.0], psi(np.array([0.0, 1.0])), [0.0, 1.0],
                            tol["exact"])]


def check_matrix_bounds(r, m, spec, tol, seed):
    code, fam = build_code(r, m), family_from_spec(spec)
    M = mmse_curve(code, fam, 0, 2001)
    grid = np.unique(M.grid)
    out = ber_mmse_sandwich(code, fam, 0, grid[::10], tol["exact"])
    out.append(_monotone_report("M_ext_monotone", M, tol["exact"]))
    out += list(area_bound_check(code, fam, M, float(code.rate), tol["slack"]))
    out.append(integral_decay_check(code, fam, M, tol=tol["slack"]))
    out += theorem_ber_bounds(code, fam.base, 0, tol["slack"])
    if spec.startswith("interp(bec"):
        st = bit_statistics(code, fam, 0)
        out.append(equality_report("coded BEC BER = MMSE/2", grid[::10], [st.ber(t) for t in grid[::10]],
                                   [0.5 * st.mmse(t) for t in grid[::10]], tol["exact"]))
    return _tag(out, f"RM({r},{m}) {spec}")


def check_two_look_converse(tol, seed):
    return [ber_two_look_converse(make_bsc(0.2), make_bsc(0.3), tol=tol["exact"]),
            ber_two_look_converse(make_bsc(0.2), None, tol=tol["exact"]),
            ber_two_look_converse(make_bsc(0.2), perfect_channel(), tol=tol["exact"]),
            ber_two_look_converse(make_bec(0.4), make_bsc(0.1), mu=0.3, tol=tol["exact"])]


def check_mtilde(tol, seed):
    m = mtilde(Fraction(1, 2), Fraction(1, 50), Fraction(2, 5))
    out = [_flag("mtilde u* = 0.525", m.u_star == Fraction(21, 40)), _flag("mtilde plateau = 0.2",
                                                                        m.plateau == Fraction(1, 5))]
    return out + mtilde_reports(m)


def suite_tasks(suite: str) -> list[tuple[str, Any, tuple]]:
    """(label, function, args) for every check of a suite, in report order."""
    if suite == "all":
        return [t for s in SUITES for t in suite_tasks(s)]
    matrix = [(r, m, f) for f in FAMILIES for r, m in CODES]
    if suite == "nesting":
        return [("puncturing", check_puncturing, ()), ("nesting structure", check_nesting_structure, ()),
                ("rates", check_rates, ())]
    if suite == "channels":
        return ([("capacity series", check_capacity_series, ()), ("worked examples", check_worked_examples, ())]
                + [(f"family {f}", check_family, (f,)) for f in FAMILIES + ("interp(bsc:0.3)",)])
    if suite == "identities":
        return [("two-look", check_two_look, ()),
                ("variance RM(1,3) BEC", check_variance, (1, 3, "interp(bec:0.5)")),
                ("variance RM(1,2) BSC", check_variance, (1, 2, "interp(bsc:0.11)")),
                ("Efron-Stein RM(1,3) BEC", check_efron_stein, (1, 3, "interp(bec:0.5)")),
                ("Efron-Stein RM(1,2) BSC", check_efron_stein, (1, 2, "interp(bsc:0.11)")),
                ("ABC", check_abc, ()), ("BEC influence", check_bec_influence, ()),
                ("symmetry", check_bms_linear, ()), ("Monte Carlo", check_mc, ())]
    if suite == "gexit":
        return ([(f"finite difference {f}", check_gexit_fd, (f,)) for f in ("interp(bec:0.5)", "interp(bsc:0.11)")]
                + [(f"area theorem RM({r},{m}) {f}", check_area_theorem, (r, m, f)) for r, m, f in matrix]
                + [("extended gap", check_extended_gap, ()), ("Gij", check_gij, ())]
                + [(f"bridges RM({r},{m}) {f}", check_bridges, (r, m, f)) for r, m, f in matrix])
    if suite == "bounds":
        return ([("h_b inverse", check_hb_inverse, ()), ("two-look converse", check_two_look_converse, ()),
                 ("mtilde", check_mtilde, ())]
                + [(f"bounds RM({r},{m}) {f}", check_matrix_bounds, (r, m, f)) for r, m, f in matrix])
    raise HarnessError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")


def _run_task(task, tol, seed):
    label, fn, args = task
    try:
        return fn(*args, tol, seed)
    except Exception as exc:  # a crashing check is a failed check, not a crashed run
        return [_flag(f"{label} raised {type(exc).__name__}: {exc}", False)]


def _task_suite(suite: str) -> dict[str, str]:
    names = SUITES if suite == "all" else (suite,)
    return {t[0]: s for s in names for t in suite_tasks(s)}


def run_verify(suite: str = "all", profile: str = "default", seed: int = 0, threads: int = 1) -> RunRecord:
    """Run a suite over the default matrix; reports come back in task order whatever the pool size."""
    if profile not in PROFILES:
        raise HarnessError(f"unknown tolerance profile {profile!r}")
    start = time.perf_counter()
    tasks = suite_tasks(suite)
    tol = PROFILES[profile]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_task, tasks, [tol] * len(tasks), [seed] * len(tasks)))
    else:
        results = [_run_task(t, tol, seed) for t in tasks]
    owner = _task_suite(suite)
    passed: dict[str, bool] = {}
    reports = []
    for task, reps in zip(tasks, results):
        s = owner[task[0]]
        passed[s] = passed.get(s, True) and all(r.passed for r in reps)
        for r in reps:
            d = r.summary()
            d["suite"] = s
            reports.append(d)
    config = {"suite": suite, "tol_profile": profile, "seed": seed}
    return RunRecord(config, __version__, passed, reports, time.perf_counter() - start)
