"""Command-line front end.

One JSON document configures every command:

    {
      "shape":      {"type": "unit_sphere" | "mesh", "path": "...",
                     "surface_n": 642, "volume_n": 1000},
      "inclusions": [{"center": [x, y, z]}, ...],
      "material":   {"case": 1|2|3|4|"fixed", "v2": ..., "v12": ...,
                     "rho": ..., "rho1": ...,
                     "v2_list": [...], "rho_list": [...], "rho_inf": [...]},
      "solver":     {"window": {"re": [a, b], "im": [c, d]},
                     "grid": [nx, ny], "eps_list": [...],
                     "tol_newton": 1e-11, "max_iters": 25},
      "output":     {"dir": "out"}
    }

Commands: identities, minnaert, spectrum, neumann, resonances, compare.
Every run writes a machine-readable JSON summary; the exit code is 0 iff
all requested checks pass.  The pipeline is deterministic (no RNG).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics as asym
from . import operators as ops
from .finder import SearchWindow, sweep
from .geometry import (GeometryError, Material, Scene, load_mesh,
                       make_ball_volume_quadrature, make_mesh_volume_quadrature,
                       make_unit_sphere_quadrature)
from .svgplot import scatter_svg


class ConfigError(ValueError):
    pass


@dataclass
class SceneConfig:
    scene: Scene
    window: SearchWindow | None
    eps_list: list
    tol_newton: float
    max_iters: int
    out_dir: Path
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path) -> "SceneConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(doc, base=Path(path).parent)

    @classmethod
    def from_dict(cls, doc: dict, base: Path = Path(".")) -> "SceneConfig":
        shape = doc.get("shape", {})
        stype = shape.get("type", "unit_sphere")
        if stype == "unit_sphere":
            surf = make_unit_sphere_quadrature(int(shape.get("surface_n", 642)))
            vol = make_ball_volume_quadrature(int(shape.get("volume_n", 1000)))
        elif stype == "mesh":
            mesh_path = shape.get("path")
            if not mesh_path:
                raise ConfigError("shape.type 'mesh' requires shape.path")
            mesh_path = Path(mesh_path)
            if not mesh_path.is_absolute():
                mesh_path = base / mesh_path
            if not mesh_path.exists():
                raise ConfigError(f"mesh file not found: {mesh_path}")
            try:
                surf = load_mesh(mesh_path)
                vol = make_mesh_volume_quadrature(
                    surf, int(shape.get("volume_n", 1024)))
            except GeometryError as exc:
                raise ConfigError(str(exc)) from exc
        else:
            raise ConfigError(f"unknown shape.type {stype!r}")

        centers = np.array([inc["center"] for inc in
                            doc.get("inclusions", [{"center": [0, 0, 0]}])],
                           dtype=float)
        mat_doc = dict(doc.get("material", {}))
        case = mat_doc.get("case", "fixed")
        material = Material(
            case=case,
            v2=float(mat_doc.get("v2", 1.0)),
            v12=float(mat_doc.get("v12", 0.0)),
            rho=float(mat_doc.get("rho", 1.0)),
            rho1=float(mat_doc.get("rho1", 0.0)),
            v2_list=tuple(mat_doc.get("v2_list", ())),
            rho_list=tuple(mat_doc.get("rho_list", ())),
            v_inf=tuple(mat_doc.get("v_inf", ())),
            rho_inf=tuple(mat_doc.get("rho_inf", ())),
        )
        solver = doc.get("solver", {})
        eps_list = [float(e) for e in solver.get("eps_list", [0.08, 0.04, 0.02])]
        win = None
        if "window" in solver:
            wd = solver["window"]
            grid = solver.get("grid", [12, 8])
            win = SearchWindow(re_min=wd["re"][0], re_max=wd["re"][1],
                               im_min=wd["im"][0], im_max=wd["im"][1],
                               n_re=int(grid[0]), n_im=int(grid[1]))
        out_dir = Path(doc.get("output", {}).get("dir", "helmres_out"))
        eps0 = max(eps_list) if eps_list else 1.0
        try:
            scene = Scene(surface=surf, volume=vol, centers=centers,
                          eps=eps0 if case != "fixed" else
                          float(doc.get("eps", 1.0)), material=material)
        except GeometryError as exc:
            raise ConfigError(str(exc)) from exc
        return cls(scene=scene, window=win, eps_list=eps_list,
                   tol_newton=float(solver.get("tol_newton", 1e-11)),
                   max_iters=int(solver.get("max_iters", 25)),
                   out_dir=out_dir, raw=doc)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_identities(cfg: SceneConfig) -> tuple[bool, dict]:
    """Operator-identity battery with measured residuals."""
    scene = cfg.scene
    refs = ops.reference_operators(scene)
    n = scene.surface.n
    one = np.ones(n)
    checks = {}

    def add(name, value, tol):
        checks[name] = {"value": float(value), "tol": tol,
                        "pass": bool(value <= tol)}

    add("surface_area_rel", abs(scene.surface.area / (4 * np.pi) - 1.0)
        if scene.surface.shape_tag == "UnitSphere" else 0.0, 5e-3)
    add("single_layer_unit_density", float(np.abs(refs.S0 @ one - 1.0).max())
        if scene.surface.shape_tag == "UnitSphere" else 0.0, 5e-3)
    add("gauss_row_identity", float(np.abs(refs.K0 @ one + 0.5).max()), 1e-12)
    add("jump_trace_interior", float(np.abs((refs.Kstar0 + 0.5 * np.eye(n)) @ one).max())
        if scene.surface.shape_tag == "UnitSphere" else 0.0, 2e-2)
    add("jump_trace_exterior", float(np.abs((refs.Kstar0 - 0.5 * np.eye(n)) @ one + 1.0).max())
        if scene.surface.shape_tag == "UnitSphere" else 0.0, 2e-2)
    cald = np.linalg.norm(refs.S0 @ refs.Kstar0 - refs.K0 @ refs.S0, 2) / (
        np.linalg.norm(refs.S0, 2) * np.linalg.norm(refs.K0, 2))
    add("calderon_rel", float(cald), 1e-2)
    md = refs.minnaert()
    pk2 = np.linalg.norm(refs.Pstar @ refs.K2s @ refs.Pstar
                         + refs.Pstar / md.omega_m2, 2) / np.linalg.norm(refs.Pstar, 2)
    pk3 = np.linalg.norm(refs.Pstar @ refs.K3s @ refs.Pstar
                         - 1j * md.volume / (4 * np.pi) * refs.Pstar, 2) \
        / np.linalg.norm(refs.Pstar, 2)
    add("series_k2_identity", float(pk2), 2e-2)
    add("series_k3_identity", float(pk3), 2e-2)
    add("projector_idempotent",
        float(np.linalg.norm(refs.Pstar @ refs.Pstar - refs.Pstar, 2)), 1e-10)
    ok = all(c["pass"] for c in checks.values())
    return ok, {"checks": checks}


def cmd_minnaert(cfg: SceneConfig) -> tuple[bool, dict]:
    md = ops.minnaert(cfg.scene)
    return True, {"omega_m2": md.omega_m2, "c_omega": md.c_omega,
                  "volume": md.volume}


def cmd_spectrum(cfg: SceneConfig, k: int = 6) -> tuple[bool, dict]:
    sp = ops.newton_spectrum(cfg.scene, k)
    ok = bool(np.all(sp.eigenvalues > 0)
              and np.all(np.diff(sp.eigenvalues) <= 1e-12)
              and np.all(sp.residuals < 1e-8))
    return ok, {"eigenvalues": list(map(float, sp.eigenvalues)),
                "residuals": list(map(float, sp.residuals))}


def cmd_neumann(cfg: SceneConfig, k: int = 4) -> tuple[bool, dict]:
    pairs = ops.neumann_eigenpairs(cfg.scene, k)
    ok = all(p.residual < 1e-8 for p in pairs)
    return ok, {"eigenvalues": [p.nu for p in pairs],
                "residuals": [p.residual for p in pairs]}


def _expansion(scene, case_id, zero_branch=False):
    if zero_branch:
        return asym.expand_case4_zero(scene)
    return {1: asym.expand_case1, 2: asym.expand_case2,
            3: asym.expand_case3, 4: asym.expand_case4}[case_id](scene)


def cmd_resonances(cfg: SceneConfig, zero_branch=False) -> tuple[bool, dict]:
    scene = cfg.scene
    case = scene.material.case
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    rows_csv = []
    summary = {"case": case, "eps_list": cfg.eps_list}
    ok = True
    if case == "fixed":
        v2, rho = scene.materials_at()
        if np.allclose(v2, 1.0) and np.allclose(rho, 1.0):
            summary["warning"] = "free scene: no resonances"
            _write_csv(out / "resonances.csv", rows_csv)
            return True, summary
    ex = _expansion(scene, case, zero_branch)
    summary["expansion"] = ex.to_dict()
    model = ex.kappa
    try:
        rows, slope = sweep(cfg.eps_list, case, scene, asym=model,
                            tol=cfg.tol_newton)
    except Exception as exc:
        return False, {**summary, "error": str(exc)}
    for r in rows:
        pred = model(r.eps)
        rows_csv.append({
            "case": case, "eps": r.eps,
            "re_kappa": r.kappa.real, "im_kappa": r.kappa.imag,
            "residual": r.residual, "iters": r.newton_iters,
            "re_pred": pred.real, "im_pred": pred.imag,
            "gap": abs(r.kappa - pred),
        })
        ok = ok and r.kappa.imag < 1e-6 and r.residual < 1e-8
    summary["slope"] = slope
    summary["resonances"] = rows_csv
    _write_csv(out / "resonances.csv", rows_csv)
    scatter_svg(out / "resonances.svg", [
        {"x": [r["re_kappa"] for r in rows_csv],
         "y": [r["im_kappa"] for r in rows_csv], "label": "located"},
        {"x": [r["re_pred"] for r in rows_csv],
         "y": [r["im_pred"] for r in rows_csv], "label": "first-order model",
         "marker": "cross"},
    ], title=f"resonance branch, case {case}",
        xlabel="Re kappa", ylabel="Im kappa")
    return ok, summary


def cmd_compare(cfg: SceneConfig, zero_branch=False) -> tuple[bool, dict]:
    ok, summary = cmd_resonances(cfg, zero_branch=zero_branch)
    if "resonances" not in summary:
        return ok, summary
    gaps = [r["gap"] for r in summary["resonances"]]
    rel = [g / abs(complex(r["re_pred"], r["im_pred"]))
           for g, r in zip(gaps, summary["resonances"])]
    summary["abs_gaps"] = gaps
    summary["rel_gaps"] = rel
    summary["remainder_order"] = summary.get("slope")
    return ok, summary


def _write_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if not rows:
            fh.write("case,eps,re_kappa,im_kappa,residual,iters\r\n")
            return
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()),
                                lineterminator="\r\n")
        writer.writeheader()
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="helmres",
        description="boundary-integral laboratory for acoustic resonances "
                    "of small inclusions")
    parser.add_argument("command",
                        choices=["identities", "minnaert", "spectrum",
                                 "neumann", "resonances", "compare"])
    parser.add_argument("--config", required=True, help="JSON scene document")
    parser.add_argument("--case", type=int, choices=[1, 2, 3, 4],
                        help="override the material case")
    parser.add_argument("--eps", help="comma-separated scale list override")
    parser.add_argument("--out", help="output directory override")
    parser.add_argument("--zero-branch", action="store_true",
                        help="track the square-root branch (case 4)")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = SceneConfig.from_file(args.config)
        if args.case is not None:
            doc = dict(cfg.raw)
            doc.setdefault("material", {})["case"] = args.case
            cfg = SceneConfig.from_dict(doc, base=Path(args.config).parent)
        if args.eps:
            cfg.eps_list = [float(t) for t in args.eps.split(",")]
        if args.out:
            cfg.out_dir = Path(args.out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    fn = {
        "identities": cmd_identities,
        "minnaert": cmd_minnaert,
        "spectrum": cmd_spectrum,
        "neumann": cmd_neumann,
        "resonances": lambda c: cmd_resonances(c, zero_branch=args.zero_branch),
        "compare": lambda c: cmd_compare(c, zero_branch=args.zero_branch),
    }[args.command]
    try:
        ok, summary = fn(cfg)
    except Exception as exc:
        ok, summary = False, {"error": f"{type(exc).__name__}: {exc}"}

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    summary_out = {"command": args.command, "ok": bool(ok), **summary}
    with open(cfg.out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary_out, fh, indent=2, default=str)
    if not args.quiet:
        if args.command == "identities" and "checks" in summary:
            for name, c in summary["checks"].items():
                state = "pass" if c["pass"] else "FAIL"
                print(f"{state}  {name}: {c['value']:.3e} (tol {c['tol']:.1e})")
        else:
            print(json.dumps(summary_out, indent=2, default=str))
        print(f"summary written to {cfg.out_dir / 'summary.json'}")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
