from c2f_retrieval.cli.manifest import CorpusManifest, STORE_FILES
from c2f_retrieval.cli.main import build_parser, main

__all__ = ["CorpusManifest", "STORE_FILES", "build_parser", "main"]
