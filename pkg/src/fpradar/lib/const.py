CONFIG_FILE = 'config.yaml'
TAXONOMY_FILE = 'data/taxonomy.json'
FPJS_FILE = 'data/fpjs2_keywords.txt'

CONFIG_WINDOW = 'window'
CONFIG_FIRST_YEAR = 'first_year'
CONFIG_LAST_YEAR = 'last_year'
CONFIG_PATHS = 'paths'
CONFIG_CORPUS = 'corpus'
CONFIG_TAXONOMY = 'taxonomy'
CONFIG_LABELS = 'labels'
CONFIG_FPJS = 'fpjs'
CONFIG_METADATA = 'metadata'
CONFIG_OUTPUT_DIR = 'output_dir'
CONFIG_STORE_DIR = 'store_dir'
CONFIG_SEED = 'seed'
CONFIG_JOBS = 'jobs'
CONFIG_STAGES = 'stages'
CONFIG_EMBEDDING = 'embedding'
CONFIG_PREDICTED_EDGES = 'predicted_edges'
CONFIG_FEATURE_SETS = 'feature_sets'
CONFIG_THRESHOLDS = 'thresholds'
CONFIG_THETA = 'theta'
CONFIG_SPLIT_FRACTION = 'split_fraction'
CONFIG_NEGATIVE_RATIO = 'negative_ratio'
CONFIG_DECISION_THRESHOLD = 'decision_threshold'
CONFIG_SWEEP = 'sweep'
CONFIG_EXTRACT = 'extract'
CONFIG_MODE = 'mode'
CONFIG_EMBED = 'embed'
CONFIG_DIMS = 'dims'
CONFIG_WALKS_PER_NODE = 'walks_per_node'
CONFIG_WALK_LENGTH = 'walk_length'
CONFIG_CONTEXT_WINDOW = 'window'
CONFIG_NEGATIVES = 'negatives'
CONFIG_EPOCHS = 'epochs'
CONFIG_RECENCY_BIAS = 'recency_bias'
CONFIG_LEARNING_RATE = 'learning_rate'
CONFIG_FOREST = 'forest'
CONFIG_N_TREES = 'n_trees'
CONFIG_MIN_SAMPLES_LEAF = 'min_samples_leaf'
CONFIG_CDX = 'cdx'
CONFIG_BASE_URL = 'base_url'
CONFIG_SNAPSHOT_URL = 'snapshot_url'
CONFIG_RATE_LIMIT = 'rate_limit'
CONFIG_RETRIES = 'retries'
CONFIG_BACKOFF = 'backoff'
CONFIG_TIMEOUT = 'timeout'

ENV_STORE = 'FPRADAR_STORE'

# Script labels
LABEL_FP = 'fingerprinting'
LABEL_NON_FP = 'non-fingerprinting'
LABEL_UNKNOWN = 'unknown'
LABELS = (LABEL_FP, LABEL_NON_FP, LABEL_UNKNOWN)
LABEL_FILE_VALUES = {'fp': LABEL_FP, 'non_fp': LABEL_NON_FP}

# Extraction modes
MODE_LEXICAL = 'lexical'
MODE_AST = 'ast'

# Feature sets
FEATURES_HAND = 'hand'
FEATURES_EMB = 'emb'
FEATURES_COMB = 'comb'
FEATURE_SETS = (FEATURES_HAND, FEATURES_EMB, FEATURES_COMB)

# Chain events
EVENT_BIRTH = 'birth'
EVENT_MERGE = 'merge'
EVENT_SPLIT = 'split'
EVENT_DORMANT = 'dormant'

# Detection categories
CATEGORY_UNDISCLOSED = 'undisclosed'
CATEGORY_EARLY = 'early'
CATEGORY_ON_TIME = 'on_time'
CATEGORY_LATE = 'late'
DETAIL_AT_DISCLOSURE = 'at_disclosure'
DETAIL_FIRST_OPPORTUNITY = 'first_opportunity'

# Pipeline stages, in execution order
STAGE_EXTRACT = 'extract'
STAGE_GRAPH = 'graph'
STAGE_FEATURES = 'features'
STAGE_EMBED = 'embed'
STAGE_TRAIN = 'train'
STAGE_CLUSTER = 'cluster'
STAGE_TRACK = 'track'
STAGE_LABEL = 'label'
STAGE_REPORT = 'report'
STAGES = (STAGE_EXTRACT, STAGE_GRAPH, STAGE_FEATURES, STAGE_EMBED, STAGE_TRAIN,
          STAGE_CLUSTER, STAGE_TRACK, STAGE_LABEL, STAGE_REPORT)

# Report kinds
REPORT_EVAL = 'eval'
REPORT_CLUSTERS = 'clusters'
REPORT_METRICS = 'metrics'
REPORT_TIMELINE = 'timeline'
REPORT_SWEEP = 'sweep'
REPORTS = (REPORT_EVAL, REPORT_CLUSTERS, REPORT_METRICS, REPORT_TIMELINE, REPORT_SWEEP)

# Artifacts under the output dir
RUN_MANIFEST = 'run_manifest.json'
KEYWORDS_FILE = 'keywords.jsonl'
GRAPH_DIR = 'graph/'
FEATURES_DIR = 'features/'
INFO_GAIN_FILE = 'info_gain.csv'
EMBED_DIR = 'embed/'
MODEL_DIR = 'model/'
EVAL_FILE = 'model/eval.json'
PREDICTIONS_DIR = 'predictions/'
PARTITIONS_FILE = 'partitions.json'
CHAINS_FILE = 'chains.json'
SWEEP_FILE = 'sweep.json'
LABEL_FILE = 'label.json'
REPORTS_DIR = 'reports/'
