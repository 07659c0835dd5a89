"""
Stage orchestration.

Every stage reads its inputs from the output directory, writes its own
artifacts there, and is recorded in the run manifest with a key derived from
the config, the external inputs and the checksums of upstream outputs. With
resume enabled a stage whose key and outputs still match is skipped.
"""
import hashlib
import json
import logging
import os
import numpy as np
from .. import utils
from . import const
from .cluster.louvain import build_cluster_graph, dump_partitions, load_partitions, \
        louvain_partition, split_oversized
from .cluster.tracking import dump_chains, filter_short_lived, link_partitions, load_chains, \
        sweep_thresholds
from .context import BaseContext
from .corpus.manifest import ingest_manifest
from .embed import dump_embedding, load_embedding
from .errors import StageError
from .extract import build_keyword_index, dump_keyword_sets, extract_corpus, load_keyword_sets
from .features import HandcraftedFeatures, decayed_weight, information_gain_table, \
        write_feature_table
from .graph import TemporalGraph, aggregate_to, build_temporal_graph, candidate_pairs, \
        read_slice, write_slice
from .label import cluster_metrics, detection_timeline, dominant_apis, load_fpjs, load_labels, \
        load_metadata, script_labels, select_fp_cluster
from .model.protocol import FeatureBuilder, run_yearly_protocol
from .model.training import dump_forest, load_forest, predict_edges, read_predictions, \
        sample_training_pairs, select_features, write_predictions
from .report import emit_report
from .utils.parallel_executor import map_in_parallel

logger = logging.getLogger(__name__)

STAGE_PREDICT = 'predict'
STAGE_SWEEP = 'sweep'

_upstream = {
    const.STAGE_EXTRACT: (),
    const.STAGE_GRAPH: (const.STAGE_EXTRACT,),
    const.STAGE_FEATURES: (const.STAGE_GRAPH,),
    const.STAGE_EMBED: (const.STAGE_GRAPH,),
    const.STAGE_TRAIN: (const.STAGE_GRAPH, const.STAGE_EMBED),
    const.STAGE_CLUSTER: (const.STAGE_GRAPH, const.STAGE_TRAIN),
    const.STAGE_TRACK: (const.STAGE_CLUSTER,),
    const.STAGE_LABEL: (const.STAGE_EXTRACT, const.STAGE_TRACK),
    const.STAGE_REPORT: (const.STAGE_TRAIN, const.STAGE_TRACK, const.STAGE_LABEL),
}


class RunManifest:
    def __init__(self, path):
        self.path = path
        self.data = {'version': 1, 'seed': None, 'config_digest': None, 'inputs': {},
                     'stages': {}}
        if os.path.exists(path):
            with open(path, encoding='utf-8') as f:
                self.data.update(json.load(f))

    @property
    def stages(self):
        return self.data['stages']

    def outputs(self, stage):
        return self.stages.get(stage, {}).get('outputs', {})

    def is_current(self, stage, key, output_dir):
        entry = self.stages.get(stage)
        if not entry or entry.get('key') != key:
            return False
        for rel, digest in entry['outputs'].items():
            path = os.path.join(output_dir, rel)
            if not os.path.exists(path) or utils.file_digest(path) != digest:
                return False
        return True

    def record(self, stage, key, outputs, output_dir):
        self.stages[stage] = {
                'key': key,
                'outputs': {rel: utils.file_digest(os.path.join(output_dir, rel))
                            for rel in sorted(outputs)},
                }

    def save(self):
        with open(self.path, 'w', encoding='utf-8') as f:
            json.dump(self.data, f, indent=2, sort_keys=True)


class Pipeline(BaseContext):
    def __init__(self, config, resume=False):
        super().__init__(config)
        self.resume = resume
        self.manifest = RunManifest(self.path(const.RUN_MANIFEST))
        self.manifest.data['seed'] = config.seed
        self.manifest.data['config_digest'] = config.digest()
        self.__stages = {
            const.STAGE_EXTRACT: self.extract,
            const.STAGE_GRAPH: self.graph,
            const.STAGE_FEATURES: self.features,
            const.STAGE_EMBED: self.embed,
            const.STAGE_TRAIN: self.train,
            const.STAGE_CLUSTER: self.cluster,
            const.STAGE_TRACK: self.track,
            const.STAGE_LABEL: self.label,
            const.STAGE_REPORT: self.report,
        }

    def __external_inputs(self, stage):
        """(name, path, required) for the files a stage reads outside the output dir."""
        cfg = self.config
        if stage == const.STAGE_EXTRACT:
            return [(const.CONFIG_CORPUS, cfg.corpus, True),
                    (const.CONFIG_TAXONOMY, cfg.taxonomy, False)]
        if stage == const.STAGE_LABEL:
            return [(const.CONFIG_LABELS, cfg.labels, True),
                    (const.CONFIG_CORPUS, cfg.corpus, True),
                    (const.CONFIG_FPJS, cfg.fpjs, False),
                    (const.CONFIG_METADATA, cfg.metadata, False),
                    (const.CONFIG_TAXONOMY, cfg.taxonomy, False)]
        return []

    def __stage_key(self, stage):
        h = hashlib.sha256(self.config.digest().encode('utf-8'))
        for name, path, required in self.__external_inputs(stage):
            if path is None or not os.path.exists(path):
                if required:
                    raise StageError(stage, f'missing input {name} ({path})')
                digest = None
            else:
                digest = utils.file_digest(path)
            self.manifest.data['inputs'][name] = digest
            h.update(f'{name}={digest}\n'.encode('utf-8'))
        for up in _upstream[stage]:
            h.update(json.dumps(self.manifest.outputs(up), sort_keys=True).encode('utf-8'))
        return h.hexdigest()

    def run_stage(self, stage):
        if stage not in self.__stages:
            raise ValueError(f'Unknown stage: {stage}')
        key = self.__stage_key(stage)
        if self.resume and self.manifest.is_current(stage, key, self.output_dir):
            logger.info('Skipping %s stage: inputs and outputs unchanged', stage)
            return self.manifest.outputs(stage)
        logger.info('Running %s stage', stage)
        outputs = self.__guarded(stage, self.__stages[stage])
        self.manifest.record(stage, key, outputs, self.output_dir)
        self.manifest.save()
        return self.manifest.outputs(stage)

    def __guarded(self, stage, fn):
        try:
            return fn()
        except StageError:
            raise
        except (ValueError, OSError) as e:
            raise StageError(stage, str(e)) from e

    def run(self, stages=const.STAGES):
        for stage in stages:
            self.run_stage(stage)

    # helpers reading upstream artifacts

    def __require(self, stage, artifact, command):
        path = self.path(artifact)
        if not os.path.exists(path):
            raise StageError(stage, f'missing {artifact}; run `fpradar {command}` first')
        return path

    def __keyword_sets(self, stage):
        return load_keyword_sets(self.__require(stage, const.KEYWORDS_FILE, 'extract'))

    def __graph(self, stage):
        slices = {}
        for year in self.config.years:
            slices[year] = read_slice(self.__require(stage, os.path.join(const.GRAPH_DIR, f'{year}.tsv'),
                                                     'graph'))
        missing = tuple(y for y, s in slices.items() if not s.nodes)
        return TemporalGraph(slices, self.config.window, missing)

    def __builder(self, stage, graph):
        embeddings = {}
        if self.config.embedding:
            for year in self.config.years:
                path = self.path(const.EMBED_DIR, f'{year}.npy')
                if os.path.exists(path):
                    embeddings[year] = load_embedding(path)
                elif aggregate_to(graph, year).nodes:
                    raise StageError(stage, f'missing {const.EMBED_DIR}{year}.npy; '
                                            'run `fpradar embed` first')
        return FeatureBuilder(graph, self.seed, self.config.embed, self.config.embedding,
                              self.jobs, embeddings)

    def __predictions(self):
        predictions = {}
        if not self.config.predicted_edges:
            return predictions
        for year in self.config.years:
            path = self.path(const.PREDICTIONS_DIR, f'{year + 1}.tsv')
            if os.path.exists(path):
                predictions[year + 1] = read_predictions(path)
        return predictions

    # stages

    def extract(self):
        manifest = ingest_manifest(self.config.corpus, self.config.window)
        sets = extract_corpus(manifest, self.taxonomy.vocabulary, self.config.extract_mode,
                              self.jobs)
        dump_keyword_sets(sets, self.path(const.KEYWORDS_FILE))
        return [const.KEYWORDS_FILE]

    def graph(self):
        graph = build_temporal_graph(self.__keyword_sets(const.STAGE_GRAPH), self.config.window)
        outputs = []
        for year in graph.years:
            rel = os.path.join(const.GRAPH_DIR, f'{year}.tsv')
            write_slice(graph.slices[year], self.path(rel))
            outputs.append(rel)
        return outputs

    def features(self):
        graph = self.__graph(const.STAGE_FEATURES)
        os.makedirs(self.path(const.FEATURES_DIR), exist_ok=True)
        outputs = []
        tables = {}
        for year in graph.years:
            known = graph.truncate(year)
            tables[year] = HandcraftedFeatures(aggregate_to(known, year), decayed_weight(known, year))
            pairs = candidate_pairs(tables[year].view)
            rel = os.path.join(const.FEATURES_DIR, f'{year}.csv')
            write_feature_table(pairs, tables[year].matrix(pairs), self.path(rel))
            outputs.append(rel)

        datasets = []
        for year in graph.years[1:]:
            try:
                positives, negatives = sample_training_pairs(
                        graph, year, utils.derive_seed(self.seed, 'negatives', year),
                        self.config.negative_ratio)
            except ValueError as e:
                logger.warning('No information gain for %d: %s', year, e)
                continue
            X = tables[year - 1].matrix(positives + negatives)
            datasets.append((X, np.array([1] * len(positives) + [0] * len(negatives))))
        information_gain_table(datasets).to_csv(self.path(const.INFO_GAIN_FILE), index=False,
                                                float_format='%.6f')
        outputs.append(const.INFO_GAIN_FILE)
        return outputs

    def embed(self):
        if not self.config.embedding:
            logger.info('Embedding stage disabled')
            return []
        graph = self.__graph(const.STAGE_EMBED)
        builder = FeatureBuilder(graph, self.seed, self.config.embed, True, self.jobs)
        outputs = []
        for year in graph.years:
            if not aggregate_to(graph, year).nodes:
                continue
            rel = os.path.join(const.EMBED_DIR, f'{year}.npy')
            dump_embedding(builder.node_embedding(year), self.path(rel))
            outputs += [rel, os.path.join(const.EMBED_DIR, f'{year}.keywords.txt')]
        return outputs

    def train(self):
        graph = self.__graph(const.STAGE_TRAIN)
        result = run_yearly_protocol(graph, self.config, self.__builder(const.STAGE_TRAIN, graph))
        outputs = []
        for (year, fs), forest in sorted(result.forests.items()):
            rel = os.path.join(const.MODEL_DIR, f'{year}-{fs}.joblib')
            dump_forest(forest, self.path(rel))
            outputs.append(rel)

        evaluation = {
                'full': {fs: [r.to_dict() for r in reports] for fs, reports in result.reports.items()},
                'sampled': {fs: [r.to_dict() for r in reports]
                            for fs, reports in result.sampled_reports.items()},
                'graph': {str(y): {'nodes': len(s.nodes), 'edges': s.n_edges}
                          for y, s in sorted(graph.slices.items())},
                }
        os.makedirs(self.path(const.MODEL_DIR), exist_ok=True)
        with open(self.path(const.EVAL_FILE), 'w', encoding='utf-8') as f:
            json.dump(evaluation, f, indent=2, sort_keys=True)
        outputs.append(const.EVAL_FILE)
        outputs += self.__write_predictions(result.predictions)
        return outputs

    def __write_predictions(self, predictions):
        outputs = []
        for year, preds in sorted(predictions.items()):
            rel = os.path.join(const.PREDICTIONS_DIR, f'{year}.tsv')
            write_predictions(preds, self.path(rel))
            outputs.append(rel)
        return outputs

    def predict(self):
        """Re-emit next-year predictions from the stored forests."""
        def run():
            graph = self.__graph(STAGE_PREDICT)
            builder = self.__builder(STAGE_PREDICT, graph)
            fs = self.config.primary_feature_set
            predictions = {}
            for year in graph.years[1:]:
                path = self.path(const.MODEL_DIR, f'{year}-{fs}.joblib')
                if not os.path.exists(path):
                    continue
                pairs = candidate_pairs(aggregate_to(graph, year))
                X = select_features(builder.matrix(year, pairs), fs)
                predictions[year + 1] = predict_edges(load_forest(path), pairs, X,
                                                      self.config.decision_threshold)
            if not predictions:
                raise StageError(STAGE_PREDICT, 'no trained forests; run `fpradar train` first')
            return self.__write_predictions(predictions)
        return self.__guarded(STAGE_PREDICT, run)

    def __partition_year(self, args):
        graph, predictions, year = args
        view = aggregate_to(graph, year)
        cluster_graph = build_cluster_graph(view, predictions.get(year + 1))
        partition = louvain_partition(cluster_graph, utils.derive_seed(self.seed, 'louvain', year),
                                      year)
        return split_oversized(partition, cluster_graph, cluster_graph.number_of_nodes(),
                               self.config.split_fraction,
                               utils.derive_seed(self.seed, 'split', year))

    def cluster(self):
        graph = self.__graph(const.STAGE_CLUSTER)
        predictions = self.__predictions()
        partitions = map_in_parallel(self.__partition_year,
                                     [(graph, predictions, y) for y in graph.years], self.jobs)
        dump_partitions(partitions, self.path(const.PARTITIONS_FILE))
        return [const.PARTITIONS_FILE]

    def __partitions(self, stage):
        return load_partitions(self.__require(stage, const.PARTITIONS_FILE, 'cluster'))

    def track(self):
        partitions = self.__partitions(const.STAGE_TRACK)
        chains = filter_short_lived(link_partitions(partitions, self.config.theta))
        dump_chains(chains, self.path(const.CHAINS_FILE))
        return [const.CHAINS_FILE] + self.__sweep(partitions)

    def __sweep(self, partitions):
        rows = sweep_thresholds(partitions, list(self.config.sweep))
        with open(self.path(const.SWEEP_FILE), 'w', encoding='utf-8') as f:
            json.dump(rows, f, indent=2, sort_keys=True)
        return [const.SWEEP_FILE]

    def sweep(self):
        return self.__guarded(STAGE_SWEEP,
                              lambda: self.__sweep(self.__partitions(STAGE_SWEEP)))

    def label(self):
        cfg = self.config
        chains = load_chains(self.__require(const.STAGE_LABEL, const.CHAINS_FILE, 'track'))
        if not chains:
            raise StageError(const.STAGE_LABEL, 'no temporal cluster outlived the filter')
        manifest = ingest_manifest(cfg.corpus, cfg.window)
        labels = script_labels(manifest, load_labels(cfg.labels))
        index = build_keyword_index(self.__keyword_sets(const.STAGE_LABEL), labels)
        fpjs = load_fpjs(cfg.fpjs)
        metadata = load_metadata(cfg.metadata) if cfg.metadata else {}

        metrics = {c.id: cluster_metrics(c, index, fpjs) for c in chains}
        fp_chain = select_fp_cluster(metrics)
        chain = next(c for c in chains if c.id == fp_chain)
        timelines = []
        for tl in detection_timeline(chain, metadata, index, cfg.window[0]):
            entry = tl.to_dict()
            entry['apis'] = sorted(self.taxonomy.resolve_keyword(tl.keyword))
            timelines.append(entry)
        labeling = {
                'fp_chain': fp_chain,
                'metrics': {cid: m.to_dict() for cid, m in metrics.items()},
                'sizes': {c.id: len(c.union_members) for c in chains},
                'dominance': {c.id: [e.to_dict() for e in dominant_apis(c, self.taxonomy)]
                              for c in chains},
                'timelines': timelines,
                }
        with open(self.path(const.LABEL_FILE), 'w', encoding='utf-8') as f:
            json.dump(labeling, f, indent=2, sort_keys=True)
        return [const.LABEL_FILE]

    def report(self, kinds=const.REPORTS):
        outputs = []
        for kind in kinds:
            for path in emit_report(kind, self.path(const.REPORTS_DIR), self.output_dir):
                rel = os.path.relpath(path, self.output_dir)
                outputs += [rel, rel[:-len('.csv')] + '.txt']
        return outputs
