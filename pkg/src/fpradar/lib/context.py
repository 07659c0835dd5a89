import os
from functools import cached_property
from .taxonomy import load_taxonomy


class BaseContext:
    def __init__(self, config):
        self.config = config
        self.output_dir = config.output_dir
        self.seed = config.seed
        self.jobs = config.jobs
        os.makedirs(self.output_dir, exist_ok=True)

    @cached_property
    def taxonomy(self):
        return load_taxonomy(self.config.taxonomy)

    def path(self, artifact, *parts):
        return os.path.join(self.output_dir, artifact, *parts)
