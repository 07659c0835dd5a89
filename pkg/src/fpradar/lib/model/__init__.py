from .protocol import FeatureBuilder, ProtocolResult, run_yearly_protocol
from .training import (EvalReport, Forest, TrainingSet, assemble_training_set, evaluate,
                       predict_edges, select_features, train_forest)
