class FpRadarError(ValueError):
    pass


class TaxonomyError(FpRadarError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f'{message} (line {line}, column {column})'
        super().__init__(message)
        self.line = line
        self.column = column


class IngestError(FpRadarError):
    def __init__(self, message, script_ids=()):
        self.script_ids = sorted(script_ids)
        if self.script_ids:
            message = f'{message}: {", ".join(self.script_ids)}'
        super().__init__(message)


class StageError(FpRadarError):
    def __init__(self, stage, message):
        super().__init__(f'{stage} stage: {message}')
        self.stage = stage


class AmbiguousClusterError(FpRadarError):
    def __init__(self, leaders):
        # leaders: metric name -> top two chain ids
        self.leaders = leaders
        detail = '; '.join(f'{metric}: {", ".join(ids)}' for metric, ids in leaders.items())
        super().__init__(f'No temporal cluster leads at least 3 metrics ({detail})')
