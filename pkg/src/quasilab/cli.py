"""Command-line front end.

Exit codes: 0 on success, 2 when a verification fails, 1 on any error.
Every output embeds the full configuration and the package version, and
contains no timestamps, so equal (config, seed) give byte-identical files.
"""

import csv
import io
import json
import math
import sys

import click
import numpy as np

from . import __version__
from .config import load_config
from .errors import QuasilabError

EXIT_FAIL = 2
EXIT_ERROR = 1


class _Failed(Exception):
    def __init__(self, text):
        self.text = text


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    return str(x)


def _emit(cfg, header, rows, extra=None):
    """Write rows as CSV (config as leading '# key = value' lines) or JSON."""
    if cfg.format == "json":
        body = {"version": __version__, "config": cfg.as_dict(), "columns": header, "rows": rows}
        if extra:
            body.update(extra)
        text = json.dumps(body, indent=2, sort_keys=True, default=_jsonable) + "\n"
    else:
        buf = io.StringIO()
        buf.write(f"# quasilab {__version__}\n")
        for k, v in sorted(cfg.as_dict().items()):
            if k == "extra":
                continue
            buf.write(f"# {k} = {' '.join(map(repr, v)) if isinstance(v, list) else v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in r])
        text = buf.getvalue()
    if cfg.output in ("-", ""):
        click.echo(text, nl=False)
    else:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)


def _domain(cfg):
    from .atlas import AtlasDomain

    if cfg.atlas:
        kind = "spiral_wedge" if cfg.atlas in ("spiral", "spiral_wedge") else cfg.atlas
        if kind == "disk":
            return AtlasDomain.disk().jordan_domain
        return AtlasDomain(kind, cfg.atlas_alpha, cfg.atlas_beta).jordan_domain
    from .repellers import generate_prefractal

    return generate_prefractal(_spec(cfg), cfg.generation)


def _spec(cfg):
    from .repellers import preset

    kw = {"twist": cfg.twist} if cfg.preset == "twisted_koch" else {}
    spec = preset(cfg.preset, **kw)
    if cfg.generation > spec.k_max:
        spec = preset(cfg.preset, k_max=cfg.generation, **kw)
    return spec


def _threads(cfg):
    import numba

    numba.set_num_threads(min(cfg.threads, numba.config.NUMBA_NUM_THREADS))


def _word(text):
    return tuple(int(x) for x in text.split(".")) if text else ()


def _common(f):
    opts = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="flat 'key = value' config file"),
        click.option("--seed", type=int, help="RNG seed (mandatory for Monte Carlo commands)"),
        click.option("--walks", type=int, help="walk budget"),
        click.option("--threads", type=int, help="worker threads; results do not depend on it"),
        click.option("--output", "-o", help="output path, '-' for stdout"),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), help="output format"),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _domain_opts(f):
    opts = [
        click.option("--preset", type=click.Choice(["koch", "twisted_koch", "carleson_linear"])),
        click.option("--twist", type=float, help="twist of twisted_koch"),
        click.option("--gen", "generation", type=int, help="prefractal generation"),
        click.option("--atlas", type=click.Choice(["disk", "wedge", "spiral", "spiral_wedge"]),
                     help="use a closed-form atlas domain instead of a preset"),
        click.option("--atlas-alpha", type=float),
        click.option("--atlas-beta", type=float),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _build(command, config_path, fmt, mc=None, **kw):
    cfg = load_config(config_path, command=command, format=fmt, **kw)
    cfg.validate(mc)
    _threads(cfg)
    return cfg


def _run(fn):
    """Map package errors to exit code 1 and failed verifications to 2."""
    try:
        fn()
    except _Failed as e:
        click.echo(e.text, err=True)
        sys.exit(EXIT_FAIL)
    except (QuasilabError, ValueError, OSError) as e:
        click.echo(f"error: {type(e).__name__}: {e}", err=True)
        sys.exit(EXIT_ERROR)
    except Exception as e:  # anything unexpected is still an error, not a verification failure
        click.echo(f"internal error: {type(e).__name__}: {e}", err=True)
        sys.exit(EXIT_ERROR)


@click.group()
@click.version_option(__version__)
def main():
    """Harmonic measure, rotation and multifractal counts on fractal Jordan domains."""


@main.command()
@_common
@_domain_opts
def gen(config_path, fmt, **kw):
    """Boundary vertices of a prefractal or atlas domain (columns: index, x, y, word)."""

    def go():
        cfg = _build("gen", config_path, fmt, mc=False, **kw)
        dom = _domain(cfg)
        v = dom.boundary.vertices
        words = [""] * v.size
        if dom.arc is not None:
            arc = dom.arc
            n = arc.spec.n_letters
            for seg in arc.arc_segments:
                idx = int(arc.segment_word[seg])
                digits = []
                for _ in range(arc.generation):
                    digits.append(idx % n)
                    idx //= n
                words[seg] = ".".join(map(str, digits[::-1]))
        rows = [[i, float(z.real), float(z.imag), words[i]] for i, z in enumerate(v)]
        _emit(cfg, ["index", "x", "y", "word"], rows, {"provenance": dom.provenance})

    _run(go)


@main.command()
@_common
@_domain_opts
@click.option("--depth", type=int, help="label segments by their word of this length")
def measure(config_path, fmt, depth, **kw):
    """Walk-on-spheres hit histogram (columns: segment, word, hits)."""

    def go():
        from .harmonic import sample_hits, write_histogram_csv

        cfg = _build("measure", config_path, fmt, **kw)
        dom = _domain(cfg)
        hs = sample_hits(dom, cfg.walks, cfg.seed, threads=cfg.threads)
        buf = io.StringIO()
        write_histogram_csv(buf, hs, depth if dom.arc is not None else None)
        lines = buf.getvalue().splitlines()[1:]
        rows = [next(csv.reader([line])) for line in lines]
        rows = [[int(a), b, int(c)] for a, b, c in rows]
        _emit(cfg, ["segment", "word", "hits"], rows)

    _run(go)


@main.command()
@_common
@_domain_opts
@click.option("--x", type=float, help="real part of the center")
@click.option("--y", type=float, help="imaginary part of the center")
@click.option("--delta", type=float, help="radius")
@click.option("--word", help="dot-separated word for a crosscut rotation")
@click.option("--method", type=click.Choice(["boundary_tracking", "path_integral"]), default="boundary_tracking")
def rotate(config_path, fmt, x, y, delta, word, method, **kw):
    """log rot at a point and radius, or of a word's crosscut (columns: target, log_rot, error_bound, gates)."""

    def go():
        from .rotation import rot_crosscut, rot_point
        from .spectra import _support

        cfg = _build("rotate", config_path, fmt, mc=False, **kw)
        dom = _domain(cfg)
        if word is not None:
            if dom.arc is None:
                raise ValueError("--word needs a repeller preset, not an atlas domain")
            rv = rot_crosscut(dom, _support(dom, _word(word)), method)
            target = f"word:{word}"
        else:
            if x is None or y is None or delta is None:
                raise ValueError("give --x, --y and --delta, or --word")
            rv = rot_point(dom, complex(x, y), delta, method)
            target = f"point:{x!r},{y!r},{delta!r}"
        _emit(cfg, ["target", "log_rot", "error_bound", "gates"],
              [[target, rv.log_rot, rv.additive_error_bound, rv.gates]])

    _run(go)


def _table(cfg, table, verbose=None):
    rows = [[r.scale, r.count, r.value, r.exponent] for r in table.rows]
    extra = {}
    if table.fit is not None:
        extra["fit"] = {"slope": table.fit.slope, "intercept": table.fit.intercept, "residual": table.fit.residual}
    if verbose is not None:
        extra["items"] = verbose
    _emit(cfg, ["scale", "count", "value", "exponent"], rows, extra)


def _scales(cfg, given):
    if given:
        return tuple(sorted(given, reverse=True))
    if cfg.scales:
        return tuple(sorted(cfg.scales, reverse=True))
    raise ValueError("no scales given")


@main.command()
@_common
@_domain_opts
@click.option("--delta", "deltas", type=float, multiple=True, help="disk radius (repeatable)")
@click.option("--alpha", type=float)
@click.option("--gamma", type=float)
@click.option("--eta", type=float)
@click.option("--signs", help="two of +,-,b (measure side, rotation side) or 'both'")
@click.option("--region", type=click.Choice(["boundary", "arc"]))
@click.option("--verbose-items", is_flag=True, help="include per-disk diagnostics (JSON only)")
def pack(config_path, fmt, deltas, verbose_items, **kw):
    """Packing counts of disjoint disks at each scale (columns: scale, count, value, exponent)."""

    def go():
        from .spectra import SpectrumQuery, packing_count

        cfg = _build("pack", config_path, fmt, **kw)
        dom = _domain(cfg)
        scales = _scales(cfg, deltas)
        q = SpectrumQuery("packing", cfg.signs, (cfg.alpha, cfg.gamma), cfg.eta, scales, cfg.walks, cfg.seed)
        from .spectra import run_query

        table = run_query(q, domain=dom, region=cfg.region)
        items = None
        if verbose_items:
            items = []
            for s in scales:
                res = packing_count(dom, s, cfg.alpha, cfg.gamma, cfg.eta, cfg.signs, cfg.walks, cfg.seed, cfg.region)
                items.append({"scale": s, "centers": res.centers, "log_measures": res.log_measures,
                              "log_rots": res.log_rots})
        _table(cfg, table, items)

    _run(go)


@main.command()
@_common
@click.option("--preset", type=click.Choice(["koch", "twisted_koch", "carleson_linear"]))
@click.option("--twist", type=float)
@click.option("--gen", "generation", type=int, help="prefractal generation for mc weights")
@click.option("--delta", "deltas", type=float, multiple=True)
@click.option("--alpha", type=float)
@click.option("--gamma", type=float)
@click.option("--eta", type=float)
@click.option("--signs")
@click.option("--weights", type=click.Choice(["surrogate", "mc"]))
@click.option("--verbose-items", is_flag=True, help="include the counted words (JSON only)")
def words(config_path, fmt, deltas, verbose_items, **kw):
    """Prefix-free word counts per scale (columns: scale, count, value, exponent)."""

    def go():
        from .spectra import SpectrumQuery, run_query, word_count

        cfg = _build("words", config_path, fmt, **kw)
        spec = _spec(cfg)
        dom = None
        if cfg.weights == "mc":
            from .repellers import generate_prefractal

            dom = generate_prefractal(spec, cfg.generation)
        scales = _scales(cfg, deltas)
        q = SpectrumQuery("word", cfg.signs, (cfg.alpha, cfg.gamma), cfg.eta, scales, cfg.walks, cfg.seed or 0,
                          cfg.weights)
        table = run_query(q, domain=dom, spec=spec)
        items = None
        if verbose_items:
            items = [{"scale": s, "words": [".".join(map(str, w)) for w in
                                            word_count(spec, s, cfg.alpha, cfg.gamma, cfg.eta, cfg.signs, cfg.weights,
                                                       domain=dom, walks=cfg.walks, seed=cfg.seed or 0).words]}
                     for s in scales]
        _table(cfg, table, items)

    _run(go)


@main.command()
@_common
@click.option("--preset", type=click.Choice(["koch", "twisted_koch", "carleson_linear"]))
@click.option("--twist", type=float)
@click.option("--gen", "generation", type=int)
@click.option("--scale", "scales_", type=float, multiple=True, help="1 - r (repeatable)")
@click.option("--a", type=float)
@click.option("--b", type=float)
@click.option("--weights", type=click.Choice(["surrogate", "mc"]))
def crosscuts(config_path, fmt, scales_, **kw):
    """Crosscut counts per 1 - r (columns: scale, count, value, exponent)."""

    def go():
        from .spectra import SpectrumQuery, run_query

        cfg = _build("crosscuts", config_path, fmt, **kw)
        spec = _spec(cfg)
        dom = None
        if cfg.weights == "mc":
            from .repellers import generate_prefractal

            dom = generate_prefractal(spec, cfg.generation)
        q = SpectrumQuery("crosscut", "bb", (cfg.a, cfg.b), cfg.eta, _scales(cfg, scales_), cfg.walks, cfg.seed or 0,
                          cfg.weights)
        _table(cfg, run_query(q, domain=dom, spec=spec))

    _run(go)


@main.command()
@_common
@_domain_opts
@click.option("--scale", "scales_", type=float, multiple=True, help="1 - r (repeatable)")
@click.option("--a", type=float)
@click.option("--b", type=float)
@click.option("--eta", type=float)
@click.option("--signs")
def distortion(config_path, fmt, scales_, **kw):
    """Equal-measure arcs passing the distortion windows (columns: scale, count, value, exponent)."""

    def go():
        from .spectra import SpectrumQuery, run_query

        cfg = _build("distortion", config_path, fmt, **kw)
        dom = _domain(cfg)
        q = SpectrumQuery("distortion", cfg.signs, (cfg.a, cfg.b), cfg.eta, _scales(cfg, scales_), cfg.walks, cfg.seed)
        _table(cfg, run_query(q, domain=dom))

    _run(go)


LEMMAS = ("propagation", "carleson", "rotation", "finite-scale", "relation", "reflection", "stability")


@main.command()
@click.argument("lemma", type=click.Choice(LEMMAS))
@_common
@click.option("--preset", type=click.Choice(["koch", "twisted_koch", "carleson_linear"]))
@click.option("--twist", type=float)
@click.option("--gen", "generation", type=int)
@click.option("--surrogate", is_flag=True, help="use surrogate product weights (exact, no walks)")
@click.option("--delta", type=float, help="base scale")
@click.option("--alpha", type=float)
@click.option("--gamma", type=float)
@click.option("--eta", type=float)
@click.option("--signs")
def verify(lemma, config_path, fmt, surrogate, delta, **kw):
    """Run one quantitative check; exit code 2 when it fails.  Output is the report as JSON."""

    def go():
        from . import verify as V

        weights = "surrogate" if surrogate else "mc"
        mc = not surrogate and lemma not in ("propagation", "rotation")
        cfg = _build(f"verify {lemma}", config_path, "json" if fmt is None else fmt, mc=mc, weights=weights, **kw)
        spec = _spec(cfg)
        seed = cfg.seed or 0
        d = delta or 3.0**-2
        if lemma == "propagation":
            rep = V.propagation_check(spec, d, cfg.alpha, cfg.gamma, cfg.eta, signs=cfg.signs)
        elif lemma == "carleson":
            letters = [(i,) for i in range(spec.n_letters)]
            rep = V.carleson_ratio_scan(spec, letters, [1, 2, 3, 4], letters, cfg.walks, seed, weights,
                                        generation=cfg.generation)
        elif lemma == "rotation":
            rng = np.random.default_rng(seed)
            pairs = [(tuple(rng.integers(spec.n_letters, size=3)), tuple(rng.integers(spec.n_letters, size=3)))
                     for _ in range(50)]
            rep = V.rotation_multiplicativity_scan(spec, pairs, "symbolic" if surrogate else "geometric")
        elif lemma == "finite-scale":
            rep = V.finite_scale_spectrum(spec, d, cfg.alpha, cfg.gamma, cfg.eta, signs=cfg.signs, weights=weights,
                                          walks=cfg.walks, seed=seed)
        elif lemma == "relation":
            rep = V.relation_check(spec, [(-0.2, 0.0), (0.25, 0.0)], eta=cfg.eta, walks=cfg.walks, seed=seed,
                                   generation=cfg.generation)
        elif lemma == "reflection":
            rep = V.reflection_check(spec, d, cfg.alpha, cfg.gamma, cfg.eta, cfg.signs, weights, cfg.walks, seed,
                                     cfg.generation)
        else:
            from .repellers import generate_prefractal

            rep = V.rotation_stability_scan(generate_prefractal(spec, cfg.generation), d, seed=seed)
        body = json.loads(rep.to_json())
        body.pop("runtime")
        out = {"version": __version__, "config": cfg.as_dict(), "report": body}
        text = json.dumps(out, indent=2, sort_keys=True, default=_jsonable) + "\n"
        if cfg.output in ("-", ""):
            click.echo(text, nl=False)
        else:
            with open(cfg.output, "w") as fh:
                fh.write(text)
        click.echo(rep.to_text(), err=True)
        if not rep.passed:
            raise _Failed(f"{lemma}: verification failed")

    _run(go)


@main.command("atlas-check")
@_common
@click.option("--kind", type=click.Choice(["disk", "wedge", "spiral", "spiral_wedge"]), required=True)
@click.option("--alpha", "atlas_alpha", type=float, default=1.0)
@click.option("--beta", "atlas_beta", type=float, default=0.0)
@click.option("--kmin", type=int, default=4)
@click.option("--kmax", type=int, default=12)
def atlas_check(config_path, fmt, kind, kmin, kmax, **kw):
    """Derivative and rotation proxies against the closed form at the tip, arcs of length 2**-k.

    Columns: k, arc_length, log_exact_abs, log_proxy_abs, derivative_ratio, exact_arg, log_rot, rotation_ratio.
    """

    def go():
        from .atlas import AtlasDomain, probe_scan

        cfg = _build("atlas-check", config_path, fmt, mc=False, atlas=kind, **kw)
        k = "spiral_wedge" if kind in ("spiral", "spiral_wedge") else kind
        dom = AtlasDomain.disk() if k == "disk" else AtlasDomain(k, cfg.atlas_alpha, cfg.atlas_beta)
        scan = probe_scan(dom, range(kmin, kmax + 1))
        rows = []
        for kk, rec, dr, rr in zip(scan.ks, scan.records, scan.derivative_ratios, scan.rotation_ratios):
            rows.append([kk, rec.arc.length, rec.log_exact_abs, math.log(rec.proxy_abs_derivative), dr,
                         rec.exact_arg, rec.log_rot, rr])
        _emit(cfg, ["k", "arc_length", "log_exact_abs", "log_proxy_abs", "derivative_ratio", "exact_arg", "log_rot",
                    "rotation_ratio"], rows, {"derivative_trend": scan.derivative_trend})

    _run(go)


if __name__ == "__main__":
    main()
