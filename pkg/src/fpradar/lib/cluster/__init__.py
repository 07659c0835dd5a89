from .louvain import (YearPartition, build_cluster_graph, louvain_partition, modularity,
                      split_oversized)
from .tracking import TemporalCluster, filter_short_lived, jaccard, link_partitions, sweep_thresholds
