"""Command-line front end.

Subcommands
-----------
classify    exponent table, criticality, case tags, admissibility evidence
harmonic    solve the mode profiles, write plot data and fitted constants
evolve      flow one configured datum, write profiles at the target times
norm-scan   empirical lower bounds vs predicted envelopes as CSV
verify ID   run one theorem-verification recipe (T1.1 T3.1 T4.2 T7.1..T7.4)
report      aggregate verdicts and manifest into a summary

Configs are flat `key = value` text with strict unknown-key rejection; see
DEFAULTS below for the schema.  Exit codes: 0 ok/pass, 1 invalid input,
2 numerical failure, 3 verification FAIL.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, harmonic, rates, semigroup, spectral
from .params import INF, LambdaMembershipError, LorentzParams
from .quadrature import make_grid
from .semigroup import SchemeParams


class ConfigError(ValueError):
    pass


def _parse_lorentz_list(text):
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != 4:
            raise ConfigError(f"lorentz tuple needs 4 entries, got {chunk!r}")
        vals = [INF if p == "inf" else float(p) for p in parts]
        out.append(LorentzParams(*vals))
    if not out:
        raise ConfigError("lorentz list is empty")
    return out


def _parse_int_list(text):
    return [int(p) for p in text.replace(";", ",").split(",") if p.strip()]


# key -> (parser, default as text); parsed lazily so error messages name keys
DEFAULTS = {
    "dimension": (int, "3"),
    "potential.kind": (str, "hardy"),
    "potential.lambda": (float, "2.0"),
    "potential.amplitude": (float, "1.0"),
    "potential.kappa": (float, "4.0"),
    "grid.r_min": (float, "1e-8"),
    "grid.r_max": (float, "1e4"),
    "grid.points": (int, "4096"),
    "modes.k_max": (int, "6"),
    "modes.scan": (_parse_int_list, "0"),
    "time.t_min": (float, "0.1"),
    "time.t_max": (float, "100.0"),
    "time.points_per_decade": (int, "4"),
    "lorentz": (_parse_lorentz_list, "1,inf,1,inf"),
    "alphas": (_parse_int_list, "0,1"),
    "family.j_max": (int, "6"),
    "scheme.theta": (float, "0.5"),
    "scheme.dt_cap": (float, "64"),
    "scheme.rannacher": (int, "12"),
    "delta": (float, "0.25"),
    "seed": (int, "0"),
    "evolve.data": (str, "gaussian"),
    "evolve.k": (int, "0"),
    "evolve.scale": (float, "1.0"),
}


@dataclass
class RunConfig:
    values: dict
    raw_text: str

    def __getitem__(self, key):
        return self.values[key]

    def sha256(self) -> str:
        canon = "\n".join(f"{k} = {self.values[k]}" for k in sorted(self.values))
        return hashlib.sha256(canon.encode()).hexdigest()


def parse_config(text: str) -> RunConfig:
    """Parse flat key = value text; unknown keys and bad values are fatal."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        parser = DEFAULTS[key][0]
        try:
            values[key] = parser(raw)
        except (ValueError, LambdaMembershipError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    for key, (parser, default) in DEFAULTS.items():
        values.setdefault(key, parser(default))
    _validate_config(values)
    return RunConfig(values, text)


def _validate_config(v):
    if v["grid.r_min"] <= 0 or v["grid.r_max"] <= v["grid.r_min"]:
        raise ConfigError("grid range must satisfy 0 < r_min < r_max")
    if v["time.t_min"] <= 0 or v["time.t_max"] <= v["time.t_min"]:
        raise ConfigError("time range must satisfy 0 < t_min < t_max")
    if v["grid.points"] < 64:
        raise ConfigError("grid.points too small")
    if v["potential.kind"] not in ("hardy", "zero", "inverse_power"):
        raise ConfigError(f"unknown potential.kind {v['potential.kind']!r}")
    if any(a < 0 for a in v["alphas"]):
        raise ConfigError("alphas must be nonnegative")
    r_needed = 20.0 * math.sqrt(v["time.t_max"])
    if v["grid.r_max"] < r_needed:
        raise ConfigError(
            f"grid.r_max must be >= 20 sqrt(t_max) = {r_needed:g} to keep the "
            "absorbing boundary passive")


def build_potential(cfg: RunConfig) -> spectral.PotentialSpec:
    kind = cfg["potential.kind"]
    n = cfg["dimension"]
    if kind == "hardy":
        return spectral.PotentialSpec.hardy(n, cfg["potential.lambda"])
    if kind == "zero":
        return spectral.PotentialSpec.zero(n)
    return spectral.PotentialSpec.inverse_power(
        n, cfg["potential.amplitude"], cfg["potential.kappa"])


def build_profiles(cfg: RunConfig) -> harmonic.ProfileSet:
    spec = build_potential(cfg)
    grid = make_grid(cfg["grid.r_min"], cfg["grid.r_max"], cfg["grid.points"])
    return harmonic.ProfileSet.build(spec, k_max=cfg["modes.k_max"], grid=grid)


def scheme_from(cfg: RunConfig) -> SchemeParams:
    return SchemeParams(theta=cfg["scheme.theta"], dt_cap=cfg["scheme.dt_cap"],
                        rannacher_steps=cfg["scheme.rannacher"])


def time_grid(cfg: RunConfig) -> np.ndarray:
    t0, t1 = cfg["time.t_min"], cfg["time.t_max"]
    decades = math.log10(t1 / t0)
    n = max(2, int(round(decades * cfg["time.points_per_decade"])) + 1)
    return np.geomspace(t0, t1, n)


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

_FMT = "%.10e"


def _fmt(x) -> str:
    if x is None:
        return ""
    if x == INF:
        return "inf"
    return _FMT % x


@dataclass
class Manifest:
    out_dir: Path
    config_sha: str
    seed: int
    constants: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    files: list = field(default_factory=list)
    started: float = field(default_factory=time.monotonic)

    def add_constant(self, name, value):
        self.constants.append((name, value))

    def add_warning(self, message):
        if message not in self.warnings:
            self.warnings.append(message)

    def add_file(self, path: Path):
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.files.append((path.name, digest))

    def write(self):
        lines = [f"artifact = lorentzheat {__version__}",
                 f"config_sha256 = {self.config_sha}",
                 f"seed = {self.seed}",
                 f"wall_clock_seconds = {time.monotonic() - self.started:.3f}"]
        lines += [f"constant {n} = {_fmt(v)}" for n, v in self.constants]
        lines += [f"warning {w}" for w in self.warnings]
        lines += [f"file {name} sha256={digest}" for name, digest in self.files]
        (self.out_dir / "manifest.txt").write_text("\n".join(lines) + "\n")


def write_csv(path: Path, header: str, rows) -> None:
    body = "\n".join(",".join(_fmt(c) if not isinstance(c, str) else c
                              for c in row) for row in rows)
    path.write_text(header + "\n" + body + ("\n" if body else ""))


def write_columns(path: Path, *columns) -> None:
    rows = zip(*columns)
    path.write_text("\n".join(" ".join(_fmt(c) for c in row) for row in rows) + "\n")


def _tuple_slug(lp: LorentzParams) -> str:
    def s(x):
        return "inf" if x == INF else ("%g" % x)
    return f"p{s(lp.p)}q{s(lp.q)}s{s(lp.sigma)}t{s(lp.theta)}"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_classify(cfg: RunConfig, out: Path, manifest: Manifest) -> int:
    spec = build_potential(cfg)
    crit = spectral.classify_criticality(spec)
    if crit == spectral.UNKNOWN:
        print("criticality: unknown (exponent fit ambiguous; assert explicitly)")
        return 2
    table = spectral.exponent_table(spec, crit, cfg["modes.k_max"])
    ok, evidence = spectral.check_nonnegativity(spec)
    sups = spectral.check_inverse_square_smoothness(spec, ell_max=2)
    lines = [f"potential = {spec.label}", f"dimension = {spec.dimension}",
             f"criticality = {crit}",
             f"nonnegative = {ok} ({evidence})",
             "smoothness sups " + " ".join(f"l={l}:{v:.4g}" for l, v in sups.items()),
             "k omega d A1 A2 B"]
    for k in range(table.k_max + 1):
        row = table.row(k)
        lines.append(f"{k} {row['omega']:g} {row['d']} "
                     f"{row['A1']:.12g} {row['A2']:.12g} {row['B']}")
    for alpha in cfg["alphas"]:
        try:
            tag = rates.classify_cases(table, alpha)
            lines.append(f"case alpha={alpha}: {tag.render()}")
        except rates.AmbiguousCaseError as exc:
            lines.append(f"case alpha={alpha}: ambiguous ({exc})")
    text = "\n".join(lines) + "\n"
    print(text, end="")
    path = out / "classify.txt"
    path.write_text(text)
    manifest.add_file(path)
    if not ok:
        manifest.add_warning("nonnegativity evidence failed")
    return 0


def cmd_harmonic(cfg: RunConfig, out: Path, manifest: Manifest) -> int:
    ps = build_profiles(cfg)
    for k, hp in sorted(ps.hks.items()):
        path = out / f"harmonic_k{k}.dat"
        write_columns(path, hp.grid, hp.values)
        manifest.add_file(path)
        if hp.c is not None:
            manifest.add_constant(f"c_{k}", hp.c)
            manifest.add_constant(f"c_{k}_residual", hp.fit_residual)
        manifest.add_constant(f"A1_{k}", hp.inner_exponent)
        manifest.add_constant(f"A2_{k}_fitted", hp.fitted_outer_exponent)
    print(f"solved modes k<=({cfg['modes.k_max']}) for {ps.spec.label}; "
          f"criticality {ps.criticality}")
    return 0


def _initial_datum(cfg: RunConfig, ps: harmonic.ProfileSet, t_ref: float):
    kind = cfg["evolve.data"]
    k = cfg["evolve.k"]
    hk = ps.h(k)
    r = hk.grid
    scale = cfg["evolve.scale"] * math.sqrt(t_ref)
    if kind == "gaussian":
        return hk, np.exp(-r ** 2 / (2.0 * scale ** 2))
    if kind == "ball":
        return hk, np.where(r <= scale, 1.0, 0.0)
    if kind == "annulus":
        return hk, np.where((r > scale / 2.0) & (r <= scale), 1.0, 0.0)
    if kind == "hk_bump":
        return hk, np.where(r <= scale, hk.values, 0.0)
    raise ConfigError(f"unknown evolve.data {kind!r}")


def cmd_evolve(cfg: RunConfig, out: Path, manifest: Manifest) -> int:
    ps = build_profiles(cfg)
    ts = time_grid(cfg)
    hk, phi = _initial_datum(cfg, ps, ts[0])
    states = semigroup.evolve_mode(ps.spec, hk, phi, list(ts), scheme_from(cfg))
    for st in states:
        path = out / f"evolve_k{hk.k}_t{st.t:.6g}.dat"
        write_columns(path, st.grid, st.v_values())
        manifest.add_file(path)
        for w in st.warnings:
            manifest.add_warning(w)
    print(f"evolved {cfg['evolve.data']} datum on mode k={hk.k} "
          f"to {len(states)} times")
    return 0


def _empirical_table(cfg, ps, k, alphas, lps, ts, jobs=1):
    """{(alpha, lp_idx): [estimate per t]} via the batched sweep."""
    hk = ps.h(k)
    scheme = scheme_from(cfg)
    j_max = cfg["family.j_max"]
    if jobs <= 1 or len(ts) == 1:
        return semigroup.operator_norm_sweep(ps.spec, hk, alphas, lps, list(ts),
                                             scheme=scheme, j_max=j_max)
    chunks = [[t] for t in ts]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(
            lambda c: semigroup.operator_norm_sweep(
                ps.spec, hk, alphas, lps, c, scheme=scheme, j_max=j_max),
            chunks))
    merged = {key: [] for key in parts[0]}
    for part in parts:  # chunk order preserved by map: deterministic
        for key, vals in part.items():
            merged[key].extend(vals)
    return merged


def cmd_norm_scan(cfg: RunConfig, out: Path, manifest: Manifest, jobs=1) -> int:
    ps = build_profiles(cfg)
    ts = time_grid(cfg)
    lps = cfg["lorentz"]
    alphas = cfg["alphas"]
    if ts.size == 0:
        manifest.add_warning("empty time range: no scan rows")
    for k in cfg["modes.scan"]:
        try:
            table = _empirical_table(cfg, ps, k, alphas, lps, ts, jobs)
        except (harmonic.HarmonicSolveError, ArithmeticError,
                np.linalg.LinAlgError) as exc:
            manifest.add_warning(f"mode k={k} scan failed: {exc}")
            continue
        for i, lp in enumerate(lps):
            for alpha in alphas:
                try:
                    tag = rates.classify_cases(ps.table, alpha).render()
                except rates.AmbiguousCaseError:
                    tag = "ambiguous"
                rows = []
                for est in table[(alpha, i)]:
                    for w in est.warnings:
                        manifest.add_warning(w)
                    # per-row prediction failures are recorded, not fatal
                    try:
                        upper = rates.upper_envelope_J(ps, lp, alpha, est.t)
                        lower = rates.lower_envelope(ps, lp, alpha, est.t,
                                                     delta=cfg["delta"])
                        phi = rates.phi_alpha(ps, lp, alpha, est.t) \
                            if alpha <= 2 else None
                    except (ArithmeticError, ValueError) as exc:
                        manifest.add_warning(
                            f"envelope failure k={k} alpha={alpha} "
                            f"t={est.t:g}: {exc}")
                        upper = lower = phi = None
                    rows.append((est.t, est.value, upper, lower, phi, tag))
                path = out / f"norm_scan_k{k}_alpha{alpha}_{_tuple_slug(lp)}.csv"
                write_csv(path, "t,empirical_lower,upper_env,lower_env,"
                                "phi_alpha,case_tag", rows)
                manifest.add_file(path)
    print(f"norm scan complete: modes {cfg['modes.scan']}, "
          f"{len(alphas) * len(lps)} series each")
    return 0


# -- verification recipes -----------------------------------------------------

THEOREM_IDS = ("T1.1", "T3.1", "T4.2", "T7.1", "T7.2", "T7.3", "T7.4")

EXP_TOL = 0.05
LOG_TOL = 0.3


@dataclass
class Verdict:
    theorem: str
    subject: str
    status: str          # PASS | FAIL | SKIP
    detail: str

    def row(self):
        return (self.theorem, self.subject, self.status, self.detail)


def _fit_series(table, key):
    ests = table[key]
    ts = np.array([e.t for e in ests])
    vals = np.array([e.value for e in ests])
    return ts, vals, rates.fit_rate(ts, vals)


def _verify_family_rates(cfg, ps, out, manifest, theorem, jobs) -> list[Verdict]:
    verdicts = []
    ts = time_grid(cfg)
    lps = cfg["lorentz"]
    alphas = cfg["alphas"]
    table = _empirical_table(cfg, ps, 0, alphas, lps, ts, jobs)
    for i, lp in enumerate(lps):
        for alpha in alphas:
            subject = f"alpha={alpha} {lp.label()}"
            pred = rates.closed_form_rate(ps, lp, alpha, regime="large-t")
            if pred.theorem != theorem:
                verdicts.append(Verdict(theorem, subject, "SKIP",
                                        f"potential routes to {pred.theorem}"))
                continue
            if not pred.applicable:
                why = "; ".join(f"{c}" for c, ok, _ in pred.hypotheses if not ok)
                verdicts.append(Verdict(theorem, subject, "SKIP",
                                        f"hypothesis failed: {why}"))
                continue
            ts_arr, vals, fit = _fit_series(table, (alpha, i))
            path = out / f"{theorem}_{alpha}_{_tuple_slug(lp)}.dat"
            write_columns(path, ts_arr, vals)
            manifest.add_file(path)
            manifest.add_constant(f"{theorem}_fit_b_alpha{alpha}_{_tuple_slug(lp)}",
                                  fit.exponent)
            ok = abs(fit.exponent - pred.exponent) <= EXP_TOL and \
                abs(fit.log_power - (pred.log_power or 0.0)) <= LOG_TOL
            detail = (f"fitted {fit.exponent:+.4f} (log {fit.log_power:+.2f}) "
                      f"vs predicted {pred.exponent:+.4f} "
                      f"(log {pred.log_power:+.2f})")
            verdicts.append(Verdict(theorem, subject,
                                    "PASS" if ok else "FAIL", detail))
    return verdicts


def _verify_floor(cfg, ps, out, manifest, jobs) -> list[Verdict]:
    verdicts = []
    ts = time_grid(cfg)
    lps = cfg["lorentz"]
    alphas = cfg["alphas"]
    table = _empirical_table(cfg, ps, 0, alphas, lps, ts, jobs)
    for i, lp in enumerate(lps):
        for alpha in alphas:
            subject = f"alpha={alpha} {lp.label()}"
            free = rates.free_exponent(lp, alpha, ps.spec.dimension)
            ts_arr, vals, fit = _fit_series(table, (alpha, i))
            path = out / f"T4.2_{alpha}_{_tuple_slug(lp)}.dat"
            write_columns(path, ts_arr, vals)
            manifest.add_file(path)
            ok = fit.exponent >= free - EXP_TOL
            verdicts.append(Verdict(
                "T4.2", subject, "PASS" if ok else "FAIL",
                f"fitted {fit.exponent:+.4f} >= free {free:+.4f} - {EXP_TOL}"))
    return verdicts


def _verify_upper(cfg, ps, out, manifest, jobs) -> list[Verdict]:
    verdicts = []
    ts = time_grid(cfg)
    lps = cfg["lorentz"]
    alphas = cfg["alphas"]
    table = _empirical_table(cfg, ps, 0, alphas, lps, ts, jobs)
    for i, lp in enumerate(lps):
        for alpha in alphas:
            subject = f"alpha={alpha} {lp.label()}"
            uppers = np.array([rates.upper_envelope_J(ps, lp, alpha, t)
                               for t in ts])
            ests = table[(alpha, i)]
            vals = np.array([e.value for e in ests])
            if not np.all(np.isfinite(uppers)):
                verdicts.append(Verdict("T3.1", subject, "SKIP",
                                        "upper envelope infinite (membership)"))
                continue
            ratio = vals / uppers
            c_fit = float(np.max(ratio))
            manifest.add_constant(
                f"T3.1_C_alpha{alpha}_{_tuple_slug(lp)}", c_fit)
            path = out / f"T3.1_{alpha}_{_tuple_slug(lp)}.dat"
            write_columns(path, ts, vals, uppers)
            manifest.add_file(path)
            drift = float(np.max(ratio) / max(np.min(ratio), 1e-300))
            ok = math.isfinite(c_fit) and drift <= 10.0
            verdicts.append(Verdict(
                "T3.1", subject, "PASS" if ok else "FAIL",
                f"envelope constant {c_fit:.3g}, ratio drift {drift:.3g}"))
    return verdicts


def _verify_two_sided(cfg, ps, out, manifest, jobs) -> list[Verdict]:
    verdicts = []
    ts = time_grid(cfg)
    lps = cfg["lorentz"]
    alphas = [a for a in cfg["alphas"] if a <= 2]
    table = _empirical_table(cfg, ps, 0, alphas, lps, ts, jobs)
    for i, lp in enumerate(lps):
        for alpha in alphas:
            subject = f"alpha={alpha} {lp.label()}"
            phis = np.array([rates.phi_alpha(ps, lp, alpha, t) for t in ts])
            if not np.all(np.isfinite(phis)):
                verdicts.append(Verdict("T1.1", subject, "SKIP",
                                        "envelope infinite for this tuple"))
                continue
            vals = np.array([e.value for e in table[(alpha, i)]])
            uppers = np.array([rates.upper_envelope_J(ps, lp, alpha, t)
                               for t in ts])
            r1 = vals / phis
            r2 = uppers / phis
            band1 = float(np.max(r1) / np.min(r1))
            band2 = float(np.max(r2) / np.min(r2))
            path = out / f"T1.1_{alpha}_{_tuple_slug(lp)}.dat"
            write_columns(path, ts, vals, phis, uppers)
            manifest.add_file(path)
            ok = band1 <= 10.0 and band2 <= 10.0
            verdicts.append(Verdict(
                "T1.1", subject, "PASS" if ok else "FAIL",
                f"bands empirical/phi {band1:.3g}, upper/phi {band2:.3g}"))
    return verdicts


def cmd_verify(cfg: RunConfig, out: Path, manifest: Manifest, theorem: str,
               jobs=1) -> int:
    if theorem not in THEOREM_IDS:
        print(f"unknown theorem id {theorem!r}; choose from {THEOREM_IDS}")
        return 1
    ps = build_profiles(cfg)
    if theorem in ("T7.1", "T7.2", "T7.3", "T7.4"):
        verdicts = _verify_family_rates(cfg, ps, out, manifest, theorem, jobs)
    elif theorem == "T4.2":
        verdicts = _verify_floor(cfg, ps, out, manifest, jobs)
    elif theorem == "T3.1":
        verdicts = _verify_upper(cfg, ps, out, manifest, jobs)
    else:
        verdicts = _verify_two_sided(cfg, ps, out, manifest, jobs)
    path = out / f"verdicts_{theorem}.csv"
    write_csv(path, "theorem,subject,status,detail",
              [v.row() for v in verdicts])
    manifest.add_file(path)
    for v in verdicts:
        print(f"[{v.status}] {v.theorem} {v.subject}: {v.detail}")
    if any(v.status == "FAIL" for v in verdicts):
        return 3
    return 0


def cmd_report(cfg: RunConfig, out: Path, manifest: Manifest) -> int:
    verdict_files = sorted(out.glob("verdicts_*.csv"))
    rows = []
    for path in verdict_files:
        lines = path.read_text().splitlines()[1:]
        rows.extend(line.split(",", 3) for line in lines if line)
    missing = [tid for tid in THEOREM_IDS
               if not (out / f"verdicts_{tid}.csv").exists()]
    manifest_path = out / "manifest.txt"
    integrity = []
    if manifest_path.exists():
        for line in manifest_path.read_text().splitlines():
            if not line.startswith("file "):
                continue
            name, digest = line[5:].rsplit(" sha256=", 1)
            target = out / name
            if not target.exists():
                integrity.append(f"missing {name}")
            elif hashlib.sha256(target.read_bytes()).hexdigest() != digest:
                integrity.append(f"checksum mismatch {name}")
    summary = ["theorem subject status detail"]
    summary += [" ".join(r) for r in rows]
    summary += [f"MISSING {tid}" for tid in missing]
    summary += [f"INTEGRITY {msg}" for msg in integrity]
    text = "\n".join(summary) + "\n"
    (out / "summary.txt").write_text(text)
    write_csv(out / "summary.csv", "theorem,subject,status,detail",
              [tuple(r) for r in rows] +
              [(tid, "", "MISSING", "") for tid in missing])
    print(text, end="")
    if integrity:
        print("integrity error: " + "; ".join(integrity))
        return 2
    return 0


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lorentzheat", description=__doc__)
    parser.add_argument("--config", type=Path, required=False,
                        help="path to the key = value config file")
    parser.add_argument("--out", type=Path, default=Path("runs/out"))
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--seed", type=int, default=None,
                        help="overrides the config seed (recorded only)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("classify", "harmonic", "evolve", "norm-scan", "report"):
        sub.add_parser(name)
    vp = sub.add_parser("verify")
    vp.add_argument("theorem", choices=THEOREM_IDS)
    args = parser.parse_args(argv)

    try:
        text = args.config.read_text() if args.config else ""
        cfg = parse_config(text)
    except (OSError, ConfigError, LambdaMembershipError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 1

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    seed = cfg["seed"] if args.seed is None else args.seed
    manifest = Manifest(out, cfg.sha256(), seed)

    try:
        if args.command == "classify":
            code = cmd_classify(cfg, out, manifest)
        elif args.command == "harmonic":
            code = cmd_harmonic(cfg, out, manifest)
        elif args.command == "evolve":
            code = cmd_evolve(cfg, out, manifest)
        elif args.command == "norm-scan":
            code = cmd_norm_scan(cfg, out, manifest, jobs=args.jobs)
        elif args.command == "verify":
            code = cmd_verify(cfg, out, manifest, args.theorem, jobs=args.jobs)
        else:
            code = cmd_report(cfg, out, manifest)
    except (spectral.SpectralError, LambdaMembershipError, ConfigError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 1
    except (harmonic.HarmonicSolveError, rates.RateFitError,
            np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    manifest.write()
    return code


if __name__ == "__main__":
    sys.exit(main())
