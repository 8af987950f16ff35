"""Command-line interface.

Subcommands walk the full pipeline: prepare-corpus builds aligned raw
corpora, lemmatize derives the scrubbed variant from tagger output, train
fits embedding ensembles, weat scores them against stimulus files and
aggregates, report renders tables and the chart.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 numeric error.
"""

from __future__ import annotations

import dataclasses
import json
from collections import defaultdict
from pathlib import Path

import click

from . import __version__
from .corpus import (
    bundled_scrub_dir,
    build_raw_corpora,
    lemmatize_corpus,
    load_scrub_rules,
    parse_tagger_output,
    write_sentences,
)
from .embeddings import load_text_format, save_text_format
from .errors import DataError, NumericError
from .report import build_report, render_markdown, render_svg, render_tsv
from .stimuli import BalancedDesign, expand_balanced_design, load_stimuli
from .trainer import TrainingConfig, train
from .weat import aggregate, run_weat, DEFAULT_EXACT_CAP, WeatResult

_INT_FIELDS = {"dim", "window", "negatives", "epochs", "min_count", "seed"}
_FLOAT_FIELDS = {"lr_initial", "lr_min", "subsample_t"}


@click.group(name="embias")
@click.version_option(__version__, prog_name="embias")
def cli():
    """Train word embeddings from (optionally gender-scrubbed) corpora and
    measure gender associations with the WEAT."""


@cli.command("prepare-corpus")
@click.option("--docs", "docs", multiple=True, required=True, metavar="LANG=DIR",
              help="Per-language document directory; repeat per language.")
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
def cmd_prepare_corpus(docs, out_dir):
    """Build aligned raw corpora from parallel document directories.

    Keeps only documents present in every language and writes one
    <lang>.raw.txt per language plus manifest.json.
    """
    directories = {}
    for item in docs:
        lang, sep, directory = item.partition("=")
        if not sep or not lang or not directory:
            raise click.BadParameter(f"expected LANG=DIR, got {item!r}", param_hint="--docs")
        directories[lang] = Path(directory)
    manifest = build_raw_corpora(directories, out_dir)
    click.echo(
        f"{len(manifest.documents)} shared documents across "
        f"{', '.join(manifest.languages)}"
    )
    for lang in manifest.languages:
        click.echo(f"  {out_dir / (lang + '.raw.txt')}: {manifest.counts[lang]} tokens")


@cli.command("lemmatize")
@click.option("--language", required=True)
@click.option("--tagged", type=click.Path(exists=True, path_type=Path), required=True,
              help="Tagger TSV file, or a directory of them (read in sorted order).")
@click.option("--rules", "rules_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Scrub-rule file; defaults to the bundled rules "
              "for the language when present.")
@click.option("--match-level", type=click.Choice(["lemma", "surface"]), default="lemma",
              show_default=True)
@click.option("--no-scrub", is_flag=True, help="Lemmatize without any scrub rules.")
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
def cmd_lemmatize(language, tagged, rules_path, match_level, no_scrub, out_dir):
    """Derive the lemmatized, gender-scrubbed corpus from tagger output."""
    rules = None
    if not no_scrub:
        if rules_path is None:
            candidate = bundled_scrub_dir() / f"{language}.tsv"
            if candidate.is_file():
                rules_path = candidate
        if rules_path is not None:
            rules = load_scrub_rules(rules_path, language=language, match_level=match_level)
            click.echo(f"scrub rules: {rules_path} ({len(rules.mapping)} rules)")
        else:
            click.echo(f"no scrub rules found for {language!r}; lemmatizing only")

    files = sorted(tagged.iterdir()) if tagged.is_dir() else [tagged]

    def records():
        for f in files:
            yield from parse_tagger_output(f)

    sentences = lemmatize_corpus(records(), rules)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"{language}.lemmatized.txt"
    count = write_sentences(sentences, out_path)
    click.echo(f"{out_path}: {count} tokens")


def _load_config_file(path: Path) -> dict:
    values = {}
    known = {f.name for f in dataclasses.fields(TrainingConfig)}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not key or not value:
                raise DataError(f"{path}:{lineno}: expected 'key=value', got {line!r}")
            if key not in known:
                raise DataError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                values[key] = int(value) if key in _INT_FIELDS else float(value)
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad value for {key!r}: {value!r}") from None
    return values


@cli.command("train")
@click.option("--corpus", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--language", required=True)
@click.option("--version", "corpus_version", type=click.Choice(["raw", "lemmatized"]),
              default="raw", show_default=True)
@click.option("--runs", type=int, default=1, show_default=True,
              help="Ensemble size: trains one embedding per seed.")
@click.option("--seed-base", type=int, default=0, show_default=True,
              help="First seed; run k uses seed-base + k.")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Flat key=value hyperparameter file.")
@click.option("--dim", type=int, default=None)
@click.option("--window", type=int, default=None)
@click.option("--negatives", type=int, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--lr-initial", type=float, default=None)
@click.option("--lr-min", type=float, default=None)
@click.option("--min-count", type=int, default=None)
@click.option("--subsample-t", type=float, default=None)
@click.option("--workers", type=int, default=None,
              help="Worker threads (capped by EMBIAS_THREADS; >1 is nondeterministic).")
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
def cmd_train(corpus, language, corpus_version, runs, seed_base, config_path,
              dim, window, negatives, epochs, lr_initial, lr_min, min_count,
              subsample_t, workers, out_dir):
    """Train an ensemble of embeddings; output files are named
    <language>.<version>.seed<k>.vec."""
    if runs < 1:
        raise click.BadParameter("must be >= 1", param_hint="--runs")
    overrides = _load_config_file(config_path) if config_path else {}
    flags = {
        "dim": dim, "window": window, "negatives": negatives, "epochs": epochs,
        "lr_initial": lr_initial, "lr_min": lr_min, "min_count": min_count,
        "subsample_t": subsample_t,
    }
    overrides.update({k: v for k, v in flags.items() if v is not None})
    overrides.pop("seed", None)  # seeds come from --seed-base and --runs

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for seed in range(seed_base, seed_base + runs):
        config = TrainingConfig(seed=seed, **overrides)
        embeddings = train(corpus, config, language=language,
                           corpus_version=corpus_version, n_workers=workers)
        out_path = out_dir / f"{language}.{corpus_version}.seed{seed}.vec"
        save_text_format(embeddings, out_path)
        click.echo(f"{out_path}: {len(embeddings)} words, dim {embeddings.dim}")


def _parse_permutations(value: str) -> tuple[str, int]:
    if value == "exact":
        return "exact", 0
    try:
        n = int(value)
    except ValueError:
        raise click.BadParameter(
            f"expected 'exact' or a sample count, got {value!r}",
            param_hint="--permutations",
        ) from None
    return "monte_carlo", n


@cli.command("weat")
@click.option("--embeddings", "embedding_paths", multiple=True, required=True,
              type=click.Path(exists=True, path_type=Path),
              help="Embedding .vec file; repeat for an ensemble.")
@click.option("--stimuli", "stimulus_paths", multiple=True, required=True,
              type=click.Path(exists=True, path_type=Path),
              help="Stimulus JSON file; repeat for several.")
@click.option("--skip-oov", is_flag=True,
              help="Drop out-of-vocabulary stimulus words instead of failing; "
              "dropped words are recorded in the results.")
@click.option("--permutations", default="exact", show_default=True,
              metavar="exact|N", help="Exact enumeration or N Monte Carlo samples.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-exact", type=int, default=DEFAULT_EXACT_CAP, show_default=True)
@click.option("--workers", type=int, default=None,
              help="Worker threads for Monte Carlo sampling (capped by EMBIAS_THREADS).")
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
def cmd_weat(embedding_paths, stimulus_paths, skip_oov, permutations, seed,
             max_exact, workers, out_dir):
    """Score embeddings against stimulus files.

    Writes one result JSON per (embedding, comparison) and one aggregate
    JSON per comparison over all embeddings of the same language and corpus
    version.  Stimulus files whose language does not match an embedding's
    metadata are skipped for that embedding.
    """
    method, n_samples = _parse_permutations(permutations)
    policy = "skip" if skip_oov else "strict"

    specs = []
    for path in stimulus_paths:
        loaded = load_stimuli(path)
        if isinstance(loaded, BalancedDesign):
            specs.extend(expand_balanced_design(loaded))
        else:
            specs.append(loaded)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grouped: dict[tuple, list[WeatResult]] = defaultdict(list)
    for emb_path in embedding_paths:
        embeddings = load_text_format(emb_path)
        lang = embeddings.meta.language
        for spec in specs:
            if lang is not None and spec.language != lang:
                continue
            kwargs = {"n_samples": n_samples} if method == "monte_carlo" else {}
            result = run_weat(
                embeddings, spec, policy=policy, method=method, seed=seed,
                max_exact=max_exact, n_workers=workers, **kwargs,
            )
            stem = emb_path.name.removesuffix(".vec")
            res_path = out_dir / f"{stem}.{spec.name}.json"
            with open(res_path, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(result.to_dict(), fh, ensure_ascii=False, indent=2)
                fh.write("\n")
            for label, words in result.dropped.items():
                click.echo(
                    f"note: {emb_path.name} {spec.name}: dropped from "
                    f"{label!r}: {', '.join(words)}"
                )
            click.echo(
                f"{res_path}: S={result.statistic:.4f} d={result.effect_size:.4f} "
                f"p={result.p_value:.4g}"
            )
            meta = embeddings.meta
            grouped[(spec.language, meta.language, meta.corpus_version, spec.name)].append(result)

    if not grouped:
        raise DataError(
            "no (embedding, stimulus) pair matched; check languages and file naming"
        )
    for (spec_lang, lang, version, name), results in sorted(
        grouped.items(), key=lambda kv: [str(p) for p in kv[0]]
    ):
        agg = aggregate(results)
        agg_path = out_dir / f"{lang or spec_lang}.{version or 'unknown'}.{name}.aggregate.json"
        with open(agg_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(agg.to_dict(), fh, ensure_ascii=False, indent=2)
            fh.write("\n")
        click.echo(
            f"{agg_path}: n_runs={agg.n_runs} m.t.s.={agg.mean_statistic:.4f} "
            f"m.e.s.={agg.mean_effect_size:.4f} m.p.v.={agg.mean_p_value:.4g}"
        )


@cli.command("report")
@click.option("--results", "result_paths", multiple=True, required=True,
              type=click.Path(exists=True, path_type=Path),
              help="Aggregate JSON file, or a directory searched for "
              "*.aggregate.json; repeat as needed.")
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
def cmd_report(result_paths, out_dir):
    """Render aggregate results as a TSV and Markdown table and a grouped
    bar chart (SVG), plus a machine-readable report.json."""
    files = []
    for path in result_paths:
        if path.is_dir():
            files.extend(sorted(path.glob("*.aggregate.json")))
        else:
            files.append(path)
    if not files:
        raise DataError("no aggregate result files found")

    aggregates = []
    for f in files:
        with open(f, "r", encoding="utf-8") as fh:
            aggregates.append(json.load(fh))
    report = build_report(
        aggregates, toolkit_version=__version__,
        config={"inputs": [str(f) for f in files]},
    )

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {
        "report.tsv": render_tsv(report),
        "report.md": render_markdown(report),
        "report.svg": render_svg(report),
        "report.json": report.to_json(),
    }
    for name, content in outputs.items():
        path = out_dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
        click.echo(str(path))


def main(argv=None) -> int:
    """Entry point mapping exceptions to documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as e:
        return int(e.exit_code)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except NumericError as e:
        click.echo(f"error: {e}", err=True)
        return 3
    except DataError as e:
        click.echo(f"error: {e}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
