"""Command-line front end: solve, analyze, exact, gaps, report.

Exit codes: 0 success, 2 configuration error, 3 meshing/solver failure,
4 analysis failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import analysis, eigensolve, exact, fem, meshing, svgplot
from .configio import ConfigError, DomainConfig, load_domain_config
from .geometry import GeometryError, SpaceForm

_EXIT_CONFIG = 2
_EXIT_SOLVER = 3
_EXIT_ANALYSIS = 4

_GRAPH_LABELS = {
    "N": "graph 1: N(t)",
    "D": "graph 2: D(t) = N(t) - refined(t)",
    "A": "graph 3: A(t)",
    "t14A": "graph 4: t^(1/4) A(t)",
    "t14At2": "graph 5: t^(1/4) A(t^2)",
    "At2": "graph 4: A(t^2)",
    "runmean": "running mean of s^(1/2) A(s^2)",
}


@dataclass
class RunConfig:
    """Pipeline options for one domain run."""

    config_path: str
    out_dir: str
    refinements: int = 5
    num_eigs: int = 150
    tol: float = 1e-9
    samples: int = 4096
    target_h: float | None = None
    emit_svg: bool = True
    emit_gaps: bool = True
    use_oracle: bool = False
    all_eigenvalues: bool = False
    bin_width: float | None = None
    quiet: bool = False

    def __post_init__(self):
        if self.refinements < 2:
            raise ConfigError("need >= 2 refinements for extrapolation")
        if self.num_eigs < 1:
            raise ConfigError("num_eigs must be >= 1")


def _log(cfg: RunConfig, msg: str) -> None:
    if not cfg.quiet:
        print(msg, file=sys.stderr, flush=True)


def _graph_index(space: SpaceForm, key: str) -> int:
    keys = analysis.SPH_GRAPH_KEYS if space is SpaceForm.SPHERICAL else analysis.FLAT_GRAPH_KEYS
    return keys.index(key) + 1


# ---------------------------------------------------------------------------
# solve


def run_solve(cfg: RunConfig) -> dict:
    """Mesh, refine, solve and extrapolate one domain; write spectrum + table."""
    domain_cfg = load_domain_config(cfg.config_path)
    domain = domain_cfg.domain
    os.makedirs(cfg.out_dir, exist_ok=True)

    target_h = cfg.target_h if cfg.target_h is not None else domain_cfg.target_h
    t0 = time.time()
    mesh = meshing.triangulate(domain, target_h)
    meshes = [mesh]
    for _ in range(cfg.refinements):
        meshes.append(meshing.refine(meshes[-1]))
    _log(
        cfg,
        f"meshed {domain_cfg.name}: levels 0..{cfg.refinements}, "
        f"finest {meshes[-1].num_triangles} triangles ({time.time() - t0:.1f}s)",
    )

    weight = fem.ConformalWeight(domain.space)
    free_dims = [
        m.num_vertices - len(fem.dirichlet_vertices(m)) for m in meshes
    ]
    m_final = min(cfg.num_eigs, *free_dims[-3:])
    if m_final < 1:
        raise eigensolve.SolveError("finest meshes leave no free nodes to solve")

    slices: list[eigensolve.SpectrumSlice] = []
    for lev, msh in enumerate(meshes):
        k = min(m_final, free_dims[lev])
        if k < 1:
            slices.append(
                eigensolve.SpectrumSlice(np.array([]), lev, np.array([]))
            )
            continue
        t0 = time.time()
        problem = fem.assemble(msh, weight)
        try:
            sl = eigensolve.solve_lowest(problem, k, cfg.tol)
        except eigensolve.SolveError as exc:
            raise eigensolve.SolveError(
                f"refinement level {lev}: {exc}", partial=exc.partial
            ) from exc
        slices.append(eigensolve.SpectrumSlice(sl.eigenvalues, lev, sl.residual_norms))
        _log(
            cfg,
            f"level {lev}: {problem.dimension} free nodes, {k} eigenvalues "
            f"({time.time() - t0:.1f}s)",
        )

    extr = eigensolve.extrapolate_spectrum(slices[-3:])

    oracle_vals = None
    if domain_cfg.oracle is not None:
        oracle_vals = exact.oracle_spectrum(domain_cfg.oracle, m_final).eigenvalues

    spectrum_path = os.path.join(cfg.out_dir, "spectrum.csv")
    eigensolve.write_spectrum_file(
        spectrum_path,
        predicted=extr.predicted,
        ratio=extr.ratios,
        trusted=extr.trusted,
        levels=[s.eigenvalues for s in slices],
        level_ids=[s.level for s in slices],
    )
    table_path = os.path.join(cfg.out_dir, "table.txt")
    _write_table(table_path, slices, extr, oracle_vals)
    _log(cfg, f"trust_count = {extr.trust_count} of {len(extr)}")
    return {
        "config": domain_cfg,
        "slices": slices,
        "extrapolated": extr,
        "spectrum_path": spectrum_path,
        "table_path": table_path,
    }


def _write_table(path, slices, extr, oracle_vals) -> None:
    headers = ["", "Initial"] + [str(s.level) for s in slices[1:]] + ["Predicted"]
    if oracle_vals is not None:
        headers.append("True")
    rows = []
    for i in range(len(extr)):
        row = [str(i + 1)]
        for s in slices:
            row.append(f"{s.eigenvalues[i]:.7g}" if i < len(s) else "0")
        row.append(f"{extr.predicted[i]:.8g}")
        if oracle_vals is not None:
            row.append(f"{oracle_vals[i]:.8g}" if i < len(oracle_vals) else "")
        rows.append(row)
    widths = [max(len(h), *(len(r[c]) for r in rows)) for c, h in enumerate(headers)]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("  ".join(h.rjust(w) for h, w in zip(headers, widths)) + "\n")
        for row in rows:
            fh.write("  ".join(v.rjust(w) for v, w in zip(row, widths)) + "\n")


# ---------------------------------------------------------------------------
# analyze / gaps


def _spectrum_for_analysis(cfg: RunConfig, domain_cfg: DomainConfig, spectrum_path):
    if cfg.use_oracle:
        if domain_cfg.oracle is None:
            raise ConfigError("key 'oracle': required for --use-oracle analysis")
        return exact.oracle_spectrum(domain_cfg.oracle, cfg.num_eigs).eigenvalues
    spec = eigensolve.read_spectrum_file(spectrum_path)
    eigs = spec.predicted if cfg.all_eigenvalues else spec.trusted_prefix()
    if len(eigs) == 0:
        raise analysis.AnalysisError("no trusted eigenvalues to analyze (try --all)")
    return np.sort(eigs)


def run_analyze(cfg: RunConfig, spectrum_path) -> dict:
    """Emit the graph CSV/SVG set and gap statistics for a spectrum file."""
    domain_cfg = load_domain_config(cfg.config_path)
    os.makedirs(cfg.out_dir, exist_ok=True)
    eigs = _spectrum_for_analysis(cfg, domain_cfg, spectrum_path)
    params = analysis.RefinedCountParams.from_constants(domain_cfg.constants)
    space = domain_cfg.domain.space
    series = analysis.graph_series(eigs, params, space, samples=cfg.samples)

    written = []
    for key, x, y in series.graphs:
        idx = _graph_index(space, key)
        base = os.path.join(cfg.out_dir, f"graph{idx}_{key}")
        analysis.write_graph_csv(base + ".csv", x, y)
        written.append(base + ".csv")
        if cfg.emit_svg:
            xlabel = "sqrt(t)" if key in ("t14At2", "At2", "runmean") else "t"
            svgplot.render_line_plot(base + ".svg", _GRAPH_LABELS[key], x, y, xlabel)
            written.append(base + ".svg")
    if cfg.emit_gaps:
        written.extend(run_gaps(cfg, eigs=eigs))
    return {"series": series, "files": written}


def run_gaps(cfg: RunConfig, spectrum_path=None, eigs=None) -> list[str]:
    """Consecutive-difference CDF and histogram (CSV, optionally SVG)."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    if eigs is None:
        spec = eigensolve.read_spectrum_file(spectrum_path)
        eigs = spec.predicted if cfg.all_eigenvalues else spec.trusted_prefix()
        eigs = np.sort(eigs)
    d_max = float(np.diff(eigs).max()) if len(eigs) > 1 else 1.0
    bin_width = cfg.bin_width if cfg.bin_width is not None else max(d_max / 40.0, 1e-12)
    stats = analysis.gap_stats(eigs, bin_width)
    base = os.path.join(cfg.out_dir, "gaps")
    files = list(analysis.write_gap_csvs(base, stats))
    if cfg.emit_svg:
        svgplot.render_line_plot(
            base + "_cdf.svg",
            "count of differences <= x",
            stats.cdf_x,
            stats.cdf_y * len(stats.differences),
            xlabel="x",
        )
        centers = stats.bin_edges[:-1] + 0.5 * stats.bin_width
        svgplot.render_line_plot(
            base + "_hist.svg",
            "histogram of successive differences",
            centers,
            stats.bin_counts.astype(float),
            xlabel="difference",
        )
        files += [base + "_cdf.svg", base + "_hist.svg"]
    return files


def run_exact_case(case: str, count: int, out_path) -> str:
    """Oracle spectrum in the standard spectrum file format."""
    spec = exact.oracle_spectrum(case, count)
    vals = spec.eigenvalues
    eigensolve.write_spectrum_file(
        out_path,
        predicted=vals,
        ratio=np.zeros(len(vals)),
        trusted=np.ones(len(vals), dtype=bool),
    )
    return out_path


def run_report(cfg: RunConfig) -> dict:
    """solve + analyze + gaps in one output directory."""
    solved = run_solve(cfg)
    analyzed = run_analyze(cfg, solved["spectrum_path"])
    return {**solved, **analyzed}


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser, solver: bool, graphs: bool) -> None:
    p.add_argument("--config", required=True, action="append", dest="configs",
                   help="domain configuration file (repeatable)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--jobs", type=int, default=1,
                   help="run multiple configs concurrently")
    if solver:
        p.add_argument("--refinements", type=int, default=5)
        p.add_argument("--num-eigs", type=int, default=150)
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--target-h", type=float, default=None,
                       help="initial mesh size (default 0.2 x model diameter)")
    if graphs:
        p.add_argument("--samples", type=int, default=4096)
        p.add_argument("--no-svg", action="store_true")
        p.add_argument("--no-gaps", action="store_true")
        p.add_argument("--use-oracle", action="store_true",
                       help="analyze the config's oracle spectrum")
        p.add_argument("--all", action="store_true", dest="all_eigenvalues",
                       help="use all eigenvalues, not just the trusted prefix")
        p.add_argument("--bin-width", type=float, default=None)


def _make_run_config(args, config_path: str, out_dir: str) -> RunConfig:
    return RunConfig(
        config_path=config_path,
        out_dir=out_dir,
        refinements=getattr(args, "refinements", 5),
        num_eigs=getattr(args, "num_eigs", 150),
        tol=getattr(args, "tol", 1e-9),
        samples=getattr(args, "samples", 4096),
        target_h=getattr(args, "target_h", None),
        emit_svg=not getattr(args, "no_svg", False),
        emit_gaps=not getattr(args, "no_gaps", False),
        use_oracle=getattr(args, "use_oracle", False),
        all_eigenvalues=getattr(args, "all_eigenvalues", False),
        bin_width=getattr(args, "bin_width", None),
        quiet=getattr(args, "quiet", False),
    )


def _per_config_out(args) -> list[tuple[str, str]]:
    configs = args.configs
    if len(configs) == 1:
        return [(configs[0], args.out)]
    pairs = []
    for c in configs:
        stem = os.path.splitext(os.path.basename(c))[0]
        pairs.append((c, os.path.join(args.out, stem)))
    return pairs


def _run_many(args, runner) -> None:
    pairs = _per_config_out(args)
    if args.jobs > 1 and len(pairs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [
                pool.submit(runner, _make_run_config(args, c, o)) for c, o in pairs
            ]
            for f in futures:
                f.result()
    else:
        for c, o in pairs:
            runner(_make_run_config(args, c, o))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvspec",
        description="Laplacian spectra and counting-function asymptotics "
        "on constant-curvature domains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="mesh, refine, solve and extrapolate")
    _add_common(p, solver=True, graphs=False)

    p = sub.add_parser("analyze", help="graphs and gap stats from a spectrum file")
    _add_common(p, solver=False, graphs=True)
    p.add_argument("--spectrum", help="spectrum file (default <out>/spectrum.csv)")
    p.add_argument("--num-eigs", type=int, default=600,
                   help="oracle length for --use-oracle")

    p = sub.add_parser("exact", help="emit an oracle spectrum file")
    p.add_argument("--case", required=True,
                   help=", ".join(sorted(exact.ORACLE_CASES)))
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True, help="output spectrum file")

    p = sub.add_parser("gaps", help="gap statistics from a spectrum file")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bin-width", type=float, default=None)
    p.add_argument("--all", action="store_true", dest="all_eigenvalues")
    p.add_argument("--no-svg", action="store_true")
    p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("report", help="solve + analyze + gaps")
    _add_common(p, solver=True, graphs=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            _run_many(args, run_solve)
        elif args.command == "analyze":
            pairs = _per_config_out(args)
            for c, o in pairs:
                cfg = _make_run_config(args, c, o)
                spectrum = args.spectrum or os.path.join(o, "spectrum.csv")
                run_analyze(cfg, spectrum)
        elif args.command == "exact":
            run_exact_case(args.case, args.count, args.out)
        elif args.command == "gaps":
            cfg = RunConfig(
                config_path="",
                out_dir=args.out,
                bin_width=args.bin_width,
                all_eigenvalues=args.all_eigenvalues,
                emit_svg=not args.no_svg,
                quiet=args.quiet,
            )
            run_gaps(cfg, spectrum_path=args.spectrum)
        elif args.command == "report":
            _run_many(args, run_report)
    except (ConfigError, exact.OracleError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except (meshing.MeshError, eigensolve.SolveError, GeometryError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return _EXIT_SOLVER
    except analysis.AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return _EXIT_ANALYSIS
    return 0


if __name__ == "__main__":
    sys.exit(main())
