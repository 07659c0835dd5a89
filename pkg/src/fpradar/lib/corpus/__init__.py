from .manifest import CorpusManifest, ScriptRecord, ingest_manifest, write_manifest
from .cdx import CdxClient, fetch_snapshots, fetch_many
