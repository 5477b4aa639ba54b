import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, TextIO

from pydantic import ValidationError

from src.engines import curve_engine, limit_engine, race_engine, sympower_engine, ulmer_engine
from src.engines.lpoly_engine import PlaceLedger, diagnose_rational_angles, lpolynomial, spectrum
from src.engines.places import count_places, field_from_q, places_of_degree
from src.engines.twist_engine import TwistSurveyor
from src.models.curve import CurveModel, ReductionData
from src.models.lfunction import LPolynomial, Spectrum
from src.models.poly import Place
from src.models.race import DensityMethod
from src.models.ulmer import ClosedForm, ScanRow
from src.utils.config import SUBCOMMANDS, Config, RunConfig, configure_logging
from src.utils.errors import ConfigError, FfraceError, InvalidInputError
from src.utils.serialization import (
    dump_json, lpoly_from_json, read_json, schema, spectrum_from_json, write_csv,
)

logger = logging.getLogger(__name__)

PLACE_COLUMNS = ["kind", "degree", "generator", "coefficients"]
REDUCTION_COLUMNS = ["place", "degree", "type", "a_v", "theta_v"]
RACE_COLUMNS = ["X", "T_direct", "T_explicit", "sign", "source"]
SYMPOWER_COLUMNS = ["m", "N", "S_prime", "normalized", "residual", "source", "error"]
SCAN_COLUMNS = ["p", "k", "d", "n", "rank", "L_degree", "period", "delta_low", "delta_high", "error"]
TWIST_COLUMNS = ["f", "L_degree", "conductor_degree", "rank", "epsilon", "m_minus_q",
                 "purity_residual", "delta", "delta_se", "li_verdict", "error"]


@dataclass
class CommandResult:
    """A JSON document, plus the table that --csv prints instead."""

    document: Dict
    rows: List[Dict] = field(default_factory=list)
    columns: List[str] = field(default_factory=list)


class FfraceApp:
    def __init__(self, run_config: RunConfig):
        """Bind the validated run configuration."""

        self.config = run_config

    # --- loading ---

    def _ledger(self, curve: CurveModel) -> PlaceLedger:
        return PlaceLedger(curve, self.config.max_residue_field, self.config.max_place_degree)

    def load_curve(self, path: Optional[str]) -> CurveModel:
        if not path:
            raise ConfigError("this subcommand needs --curve")
        return curve_engine.curve_from_json(read_json(path))

    def load_spectrum(self, path: Optional[str]) -> Spectrum:
        """A spectrum file, an lpoly document, or a curve file (whose L-polynomial is computed)."""

        if not path:
            raise ConfigError("this subcommand needs --spectrum (or --curve)")
        data = read_json(path)
        if "angles" in data:
            return spectrum_from_json(data)
        if "coeffs" in data:
            return self._spectrum(lpoly_from_json(data))
        curve = curve_engine.curve_from_json(data)
        return self._spectrum(lpolynomial(curve, ledger=self._ledger(curve)))

    def _spectrum(self, lpoly: LPolynomial) -> Spectrum:
        return spectrum(lpoly, self.config.purity_tol, self.config.angle_tol)

    # --- subcommands ---

    def run_places(self, q: int, max_degree: int) -> CommandResult:
        """Every place of degree <= max_degree, with the counts per degree."""

        ctx = field_from_q(q)
        rows = []
        counts = []
        for d in range(1, max_degree + 1):
            for place in places_of_degree(ctx, d):
                rows.append(self._place_to_dict(place))
            counts.append(self._count_to_dict(count_places(ctx, d)))
        document = {"q": q, "max_degree": max_degree, "places": rows, "counts": counts}
        return CommandResult(document, rows, PLACE_COLUMNS)

    def run_reduce(self, curve_path: str, max_degree: int) -> CommandResult:
        curve = self.load_curve(curve_path)
        ledger = self._ledger(curve)
        rows = [self._reduction_to_dict(r) for d in range(1, max_degree + 1) for r in ledger.reductions(d)]
        conductor = None
        if curve.p >= 5:
            conductor = curve_engine.conductor_degree(curve).to_json()
        document = {"curve": curve.to_json(), "conductor": conductor, "reductions": rows}
        return CommandResult(document, rows, REDUCTION_COLUMNS)

    def run_lpoly(self, curve_path: str, degree: Optional[int] = None) -> CommandResult:
        curve = self.load_curve(curve_path)
        lpoly = lpolynomial(curve, degree, self._ledger(curve))
        spec = self._spectrum(lpoly)
        document = self._lpoly_to_dict(lpoly, spec)
        document["li"] = diagnose_rational_angles(spec).to_json()
        rows = [{"i": i, "coeff": c} for i, c in enumerate(lpoly.coeffs)]
        return CommandResult(document, rows, ["i", "coeff"])

    def run_race(self, curve_path: str, max_x: int, method: str = "both",
                 degree: Optional[int] = None) -> CommandResult:
        """T_E(X) for X <= max_x from place sums, from the spectrum, or both."""

        if method not in ("direct", "explicit", "both"):
            raise InvalidInputError(f"unknown race method {method!r}")
        curve = self.load_curve(curve_path)
        ledger = self._ledger(curve)
        spec = None
        if method != "direct" or max_x > ledger.max_countable_degree:
            spec = self._spectrum(lpolynomial(curve, degree, ledger))
        direct = race_engine.t_direct_series(ledger, max_x) if method != "explicit" else None
        explicit = race_engine.explicit_series(spec, max_x) if method != "direct" else None

        rows = []
        for x in range(1, max_x + 1):
            t_dir = direct.value(x) if direct else None
            t_exp = explicit.value(x) if explicit else None
            rows.append({
                "X": x,
                "T_direct": t_dir,
                "T_explicit": t_exp,
                "sign": self._race_sign(spec, x, t_exp if t_exp is not None else t_dir),
                "source": direct.sources[x - 1] if direct else "spectrum",
            })
        document = {"curve": curve.name, "max_X": max_x, "method": method, "rows": rows}
        if spec is not None:
            document["mean_variance"] = race_engine.mean_variance(spec).to_json()
        return CommandResult(document, rows, RACE_COLUMNS)

    def run_density(self, spectrum_path: str, mode: str = "exact-periodic", horizon: Optional[int] = None,
                    samples: int = 100_000, cap: Optional[float] = None) -> CommandResult:
        spec = self.load_spectrum(spectrum_path)
        method = DensityMethod(mode)
        if method is DensityMethod.LIMIT_LAW_MC:
            report = limit_engine.delta_limit_law(limit_engine.build_rv(spec), samples, self.config.seed,
                                                  self.config.threads)
        elif method is DensityMethod.LIMIT_LAW_CF:
            report = limit_engine.delta_cf(limit_engine.build_rv(spec), cap)
        else:
            report = race_engine.density(spec, method, horizon)
        document = report.to_json()
        return CommandResult(document, [document], list(document))

    def run_sympower(self, curve_path: str, m: int, max_n: int, degree: Optional[int] = None) -> CommandResult:
        curve = self.load_curve(curve_path)
        ledger = self._ledger(curve)
        if m == 1 and max_n > ledger.max_countable_degree:
            lpolynomial(curve, degree, ledger)
        rows = [r.as_row() for r in sympower_engine.sympower_table(curve, m, max_n, ledger)]
        document = {"curve": curve.name, "m": m, "max_N": max_n, "rows": rows}
        return CommandResult(document, rows, SYMPOWER_COLUMNS)

    def run_ulmer(self, p: int, k: int, d: int, check_theorems: bool = False,
                  form: str = ClosedForm.STATED.value) -> CommandResult:
        spec = ulmer_engine.validate(p, k, d)
        lpoly, spectrum_ = ulmer_engine.closed_form_L(spec, form)
        report = ulmer_engine.delta_exact(spec, form)
        document = {
            "spec": spec.to_json(),
            "form": ClosedForm(form).value,
            "epsilon_d": ulmer_engine.epsilon_d(spec),
            "rank": ulmer_engine.rank(spec),
            "L_degree": lpoly.degree,
            "L_coeffs": list(lpoly.coeffs) if lpoly.is_expanded else None,
            "blocks": lpoly.to_json().get("blocks", []),
            "epsilon": spectrum_.epsilon,
            "m_minus_q": spectrum_.m_minus_q,
            "delta": report.to_json(),
            "period": report.period,
        }
        if check_theorems:
            document["theorem_report"] = ulmer_engine.theorem_check(spec, form).to_json()
        lo, hi = (report.value, report.value) if report.is_exact else report.interval
        row = ScanRow(p, k, d, n=spec.n, rank=document["rank"], degree=lpoly.degree,
                      period=report.period, delta_low=lo, delta_high=hi)
        return CommandResult(document, [row.as_row()], SCAN_COLUMNS)

    def run_ulmer_scan(self, p_max: int, d_max: int, k_max: int, form: str = ClosedForm.STATED.value,
                       limit_point: Optional[int] = None) -> CommandResult:
        if limit_point is not None:
            result = ulmer_engine.limit_point_search(limit_point)
            document = result.to_json()
            return CommandResult(document, [document], list(document))
        scanner = ulmer_engine.UlmerScanner(self.config.threads, form)
        rows = [r.as_row() for r in scanner.scan(p_max, d_max, k_max, self._progress)]
        document = {"p_max": p_max, "d_max": d_max, "k_max": k_max, "form": ClosedForm(form).value, "rows": rows}
        return CommandResult(document, rows, SCAN_COLUMNS)

    def run_limitlaw(self, spectrum_path: Optional[str], samples: int = 100_000, with_cf: bool = True,
                     cap: Optional[float] = None, synthetic: Optional[Sequence[int]] = None) -> CommandResult:
        """delta under the LI model by sampling and by inversion, with the Gaussian comparison."""

        if synthetic is not None:
            q, degree, rank = synthetic
            spec = limit_engine.synthetic_spectrum(q, degree, rank, self.config.seed)
        else:
            spec = self.load_spectrum(spectrum_path)
        rv = limit_engine.build_rv(spec)
        seed, threads = self.config.seed, self.config.threads
        mc = limit_engine.delta_limit_law(rv, samples, seed, threads)
        cf = limit_engine.delta_cf(rv, cap) if with_cf and rv.k else None
        document = {
            "label": limit_engine.LI_MODEL,
            "samples": samples,
            "seed": seed,
            "rv": rv.to_json(),
            "delta_mc": mc.point(),
            "se": mc.standard_error,
            "delta_cf": cf.estimate if cf else None,
            "cf_truncation": cf.truncation if cf else None,
            "mean": rv.mean,
            "var": rv.variance,
            "mean_variance": race_engine.mean_variance(spec).to_json(),
            "gaussian_sup_distance": None,
        }
        if spec.degree > 0:
            gaussian = limit_engine.gaussian_distance(rv, samples, seed, threads=threads)
            document["gaussian_sup_distance"] = gaussian.sup_distance
            document["gaussian"] = gaussian.to_json()
        if spec.degree >= 2:
            document["berry_esseen"] = limit_engine.berry_esseen_conditions(rv).to_json()
        row = {k: document[k] for k in ("delta_mc", "se", "delta_cf", "mean", "var", "gaussian_sup_distance")}
        return CommandResult(document, [row], list(row))

    def run_twists(self, curve_path: str, d: int, sample: Optional[int] = None, samples: Optional[int] = None,
                   extension: int = 1) -> CommandResult:
        base = self.load_curve(curve_path)
        surveyor = TwistSurveyor(base, self.config.threads, samples, self.config.max_residue_field, extension)
        survey = surveyor.survey(d, sample, self.config.seed, self._progress)
        document = survey.to_json()
        return CommandResult(document, document["twists"], TWIST_COLUMNS)

    def run_schema(self, name: str) -> CommandResult:
        return CommandResult(schema(name))

    # --- converters ---

    def _place_to_dict(self, place: Place) -> Dict:
        return {
            "kind": place.kind.value,
            "degree": place.degree,
            "generator": place.label(),
            "coefficients": place.generator.to_json() if place.generator is not None else None,
        }

    def _count_to_dict(self, count) -> Dict:
        return {"degree": count.degree, "count": count.count, "residual": count.residual,
                "bound": count.bound, "within_bound": count.within_bound}

    def _reduction_to_dict(self, r: ReductionData) -> Dict:
        return {
            "place": r.place.label(),
            "degree": r.place.degree,
            "type": r.type.value,
            "a_v": r.a_v,
            "theta_v": float(f"{r.theta_v:.15g}") if r.theta_v is not None else None,
        }

    def _lpoly_to_dict(self, lpoly: LPolynomial, spec: Spectrum) -> Dict:
        data = spec.to_json()
        data.update(lpoly.to_json())
        return data

    def _race_sign(self, spec: Optional[Spectrum], x: int, value: Optional[float]) -> Optional[int]:
        if spec is not None and spec.is_exact:
            return race_engine.t_explicit_exact(spec, x).sign()
        if value is None:
            return None
        return (value > 0) - (value < 0)

    def _progress(self, event: str, payload: Dict) -> None:
        logger.debug("%s %s", event, payload)

    # --- output ---

    def emit(self, result: CommandResult, stream: TextIO) -> None:
        if self.config.output_format == "csv" and result.columns:
            write_csv(result.rows, result.columns, stream)
        else:
            dump_json(result.document, stream)

    def save_results(self, result: CommandResult, name: str) -> str:
        """Write the result under the output directory; the file name carries no timestamp."""

        os.makedirs(Config.OUTPUT_DIR, exist_ok=True)
        ext = "csv" if self.config.output_format == "csv" else "json"
        path = os.path.join(Config.OUTPUT_DIR, f"{name}.{ext}")
        with open(path, "w", encoding="utf-8", newline="") as f:
            self.emit(result, f)
        logger.info("results saved to %s", path)
        return path


# --- command line ---

class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; command-line values override it")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="output_format", action="store_const", const="json")
    fmt.add_argument("--csv", dest="output_format", action="store_const", const="csv")
    common.add_argument("--max-residue-field", type=int)
    common.add_argument("--max-place-degree", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--purity-tol", type=float)
    common.add_argument("--angle-tol", type=float)
    common.add_argument("--log-level")
    common.add_argument("--save", metavar="NAME", help=f"also write the result under {Config.OUTPUT_DIR}/")

    parser = _Parser(prog="ffrace", description="L-functions and prime races over F_q(t)")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("places", parents=[common])
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--max-degree", type=int, required=True)

    p = sub.add_parser("reduce", parents=[common])
    p.add_argument("--curve", required=True)
    p.add_argument("--max-degree", type=int, required=True)

    p = sub.add_parser("lpoly", parents=[common])
    p.add_argument("--curve", required=True)
    p.add_argument("--degree", type=int)

    p = sub.add_parser("race", parents=[common])
    p.add_argument("--curve", required=True)
    p.add_argument("--max-X", dest="max_x", type=int, required=True)
    p.add_argument("--method", choices=["direct", "explicit", "both"], default="both")
    p.add_argument("--degree", type=int)

    p = sub.add_parser("density", parents=[common])
    p.add_argument("--spectrum", "--spec", "--curve", dest="spectrum", required=True)
    p.add_argument("--mode", choices=[m.value for m in DensityMethod], default=DensityMethod.EXACT_PERIODIC.value)
    p.add_argument("--horizon", type=int)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--cf-cap", type=float)

    p = sub.add_parser("sympower", parents=[common])
    p.add_argument("--curve", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--max-N", dest="max_n", type=int, required=True)
    p.add_argument("--degree", type=int)

    p = sub.add_parser("ulmer", parents=[common])
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--check-theorems", action="store_true")
    p.add_argument("--form", choices=[f.value for f in ClosedForm], default=ClosedForm.STATED.value)

    p = sub.add_parser("ulmer-scan", parents=[common])
    p.add_argument("--p-max", type=int, default=13)
    p.add_argument("--d-max", type=int, default=30)
    p.add_argument("--k-max", type=int, default=2)
    p.add_argument("--form", choices=[f.value for f in ClosedForm], default=ClosedForm.STATED.value)
    p.add_argument("--limit-point", type=int, metavar="M", help="search for a density near 1/(2M) instead")

    p = sub.add_parser("limitlaw", parents=[common])
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--spectrum", "--curve", dest="spectrum")
    source.add_argument("--synthetic", type=int, nargs=3, metavar=("Q", "N", "RANK"))
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--no-cf", action="store_true")
    p.add_argument("--cf-cap", type=float)

    p = sub.add_parser("twists", parents=[common])
    p.add_argument("--curve", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--sample", type=int, help="sample this many candidate polynomials instead of all")
    p.add_argument("--samples", type=int, help="Monte Carlo samples per twist")
    p.add_argument("--extension", type=int, default=1)

    p = sub.add_parser("schema", parents=[common])
    p.add_argument("name")
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "subcommand": args.subcommand,
        "curve_path": getattr(args, "curve", None),
        "spectrum_path": getattr(args, "spectrum", None),
        "max_residue_field": args.max_residue_field,
        "max_place_degree": args.max_place_degree,
        "seed": args.seed,
        "output_format": args.output_format,
        "purity_tol": args.purity_tol,
        "angle_tol": args.angle_tol,
        "threads": args.threads,
    }
    if args.config:
        return RunConfig.from_file(args.config, **overrides)
    return RunConfig(**{k: v for k, v in overrides.items() if v is not None})


def _dispatch(app: FfraceApp, args: argparse.Namespace) -> CommandResult:
    cmd = args.subcommand
    if cmd == "places":
        return app.run_places(args.q, args.max_degree)
    if cmd == "reduce":
        return app.run_reduce(args.curve, args.max_degree)
    if cmd == "lpoly":
        return app.run_lpoly(args.curve, args.degree)
    if cmd == "race":
        return app.run_race(args.curve, args.max_x, args.method, args.degree)
    if cmd == "density":
        return app.run_density(args.spectrum, args.mode, args.horizon, args.samples, args.cf_cap)
    if cmd == "sympower":
        return app.run_sympower(args.curve, args.m, args.max_n, args.degree)
    if cmd == "ulmer":
        return app.run_ulmer(args.p, args.k, args.d, args.check_theorems, args.form)
    if cmd == "ulmer-scan":
        return app.run_ulmer_scan(args.p_max, args.d_max, args.k_max, args.form, args.limit_point)
    if cmd == "limitlaw":
        return app.run_limitlaw(args.spectrum, args.samples, not args.no_cf, args.cf_cap, args.synthetic)
    if cmd == "twists":
        return app.run_twists(args.curve, args.d, args.sample, args.samples, args.extension)
    if cmd == "schema":
        return app.run_schema(args.name)
    raise ConfigError(f"unknown subcommand {cmd!r}; choose from {list(SUBCOMMANDS)}")


def _report(error: FfraceError, stream: TextIO) -> int:
    stream.write(json.dumps(error.to_record(), default=str) + "\n")
    return error.exit_code


def run(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None,
        stderr: Optional[TextIO] = None) -> int:
    """Parse argv, run one subcommand, print its result; returns the exit code."""

    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level)
        app = FfraceApp(_run_config(args))
        result = _dispatch(app, args)
    except ValidationError as e:
        return _report(ConfigError(f"invalid configuration: {e.error_count()} error(s)",
                                   errors=[err["msg"] for err in e.errors()]), stderr)
    except FfraceError as e:
        logger.debug("command failed", exc_info=True)
        return _report(e, stderr)
    app.emit(result, stdout)
    if args.save:
        app.save_results(result, args.save)
    return 0


if __name__ == "__main__":
    sys.exit(run())
