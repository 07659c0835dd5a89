import argparse
import dataclasses
import logging
import os
import sys
from .lib import const
from .lib.config import PipelineConfig
from .lib.corpus import CdxClient, fetch_many, ingest_manifest, write_manifest
from .lib.errors import StageError
from .lib.pipeline import Pipeline
from .lib.synthetic import generate_corpus
from .lib.taxonomy import load_taxonomy
from .utils import get_config

logger = logging.getLogger(__name__)

STAGE_COMMANDS = (const.STAGE_EXTRACT, const.STAGE_GRAPH, const.STAGE_FEATURES,
                  const.STAGE_EMBED, const.STAGE_TRAIN, const.STAGE_CLUSTER,
                  const.STAGE_TRACK, const.STAGE_LABEL)


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description='Command line tool for fpradar')
    parser.add_argument('--config', type=str, default=None, help='Config path')
    parser.add_argument('--seed', type=int, default=None, help='Master seed')
    parser.add_argument('--jobs', type=int, default=None, help='Worker count')
    parser.add_argument('--resume', action='store_true',
                        help='Skip stages whose inputs and outputs are unchanged')
    parser.add_argument('--output-dir', type=str, default=None, help='Artifact directory')
    parser.add_argument('--verbose', action='store_true', help='Debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    taxonomy = sub.add_parser('taxonomy-check', help='Load and summarize a taxonomy')
    taxonomy.add_argument('--taxonomy', type=str, default=None, help='Taxonomy path')

    fetch = sub.add_parser('fetch', help='Fetch yearly snapshots of script URLs')
    fetch.add_argument('urls', type=str, help='File with one script URL per line')
    fetch.add_argument('--from-year', type=int, default=None)
    fetch.add_argument('--to-year', type=int, default=None)
    fetch.add_argument('--rate-limit', type=float, default=None, help='Requests per second')
    fetch.add_argument('--store-dir', type=str, default=None, help='Snapshot store')
    fetch.add_argument('--manifest', type=str, default=None, help='Manifest to write')

    ingest = sub.add_parser('ingest', help='Validate and deduplicate the corpus manifest')
    ingest.add_argument('--verify', action='store_true', help='Check body digests')

    for stage in STAGE_COMMANDS:
        sub.add_parser(stage, help=f'Run the {stage} stage')
    sub.add_parser('predict', help='Predict next-year co-occurrence from trained forests')
    sub.add_parser('sweep', help='Re-link clusters over the threshold sweep')
    report = sub.add_parser('report', help='Emit reports')
    report.add_argument('kind', nargs='?', choices=const.REPORTS, default=None)
    sub.add_parser('run', help='Run the full pipeline')

    synth = sub.add_parser('synth', help='Write a synthetic corpus')
    synth.add_argument('out_dir', type=str)
    synth.add_argument('--from-year', type=int, default=2010)
    synth.add_argument('--to-year', type=int, default=2014)
    synth.add_argument('--scripts-per-year', type=int, default=24)
    return parser.parse_args(argv)


def load_config(args):
    config = PipelineConfig.from_dict(get_config(args.config))
    return config.replace(seed=args.seed, jobs=args.jobs, output_dir=args.output_dir)


def store_dir(args, config):
    return args.store_dir or os.environ.get(const.ENV_STORE) or config.store_dir \
            or os.path.join(config.output_dir, 'store')


def fetch(args, config):
    first = args.from_year or config.window[0]
    last = args.to_year or config.window[1]
    cdx = dict(config.cdx)
    if args.rate_limit is not None:
        cdx[const.CONFIG_RATE_LIMIT] = args.rate_limit
    store = store_dir(args, config)
    client = CdxClient(cdx, store)
    with open(args.urls, encoding='utf-8') as f:
        urls = [line.strip() for line in f if line.strip() and not line.startswith('#')]
    records = fetch_many(urls, (first, last), client, config.jobs)
    manifest = args.manifest or config.corpus or os.path.join(config.output_dir, 'corpus.jsonl')
    base = os.path.dirname(os.path.abspath(manifest))
    records = [dataclasses.replace(r, body_ref=os.path.relpath(os.path.join(store, r.body_ref), base))
               for r in records]
    write_manifest(records, manifest)
    logger.info('Wrote %d records to %s', len(records), manifest)


def dispatch(args):
    if args.command == 'synth':
        generate_corpus(args.out_dir, args.from_year, args.to_year, args.scripts_per_year,
                        seed=args.seed or 0)
        return
    if args.command == 'taxonomy-check':
        taxonomy = load_taxonomy(args.taxonomy)
        print(f'{taxonomy.n_apis} APIs, {taxonomy.n_interfaces} interfaces, '
              f'{taxonomy.n_keywords} keywords, '
              f'{len(taxonomy.prune_generic_keywords())} generic')
        return

    config = load_config(args)
    if args.command == 'fetch':
        fetch(args, config)
        return
    if args.command == 'ingest':
        if not config.corpus:
            raise StageError(args.command,
                             f'The config doesn\'t contain {const.CONFIG_PATHS}.{const.CONFIG_CORPUS}')
        manifest = ingest_manifest(config.corpus, config.window, verify=args.verify)
        for year, count in manifest.year_counts().items():
            print(f'{year}\t{count}')
        return

    pipeline = Pipeline(config, resume=args.resume)
    if args.command in STAGE_COMMANDS:
        pipeline.run_stage(args.command)
    elif args.command == 'predict':
        pipeline.predict()
    elif args.command == 'sweep':
        pipeline.sweep()
    elif args.command == 'report':
        pipeline.run_stage(const.STAGE_REPORT) if args.kind is None \
                else pipeline.report((args.kind,))
    elif args.command == 'run':
        pipeline.run()


def main(argv=None):
    args = parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    try:
        dispatch(args)
    except StageError as e:
        logger.error('%s', e)
        return 1
    except (ValueError, OSError) as e:
        logger.error('%s stage: %s', args.command, e)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
