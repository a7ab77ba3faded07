from c2f_retrieval.synthgen.generator import (
    KINDS,
    SynthSpec,
    SynthSpecError,
    SyntheticCorpus,
    generate,
    palette_colours,
    write_corpus,
)

__all__ = [
    "KINDS",
    "SynthSpec",
    "SynthSpecError",
    "SyntheticCorpus",
    "generate",
    "palette_colours",
    "write_corpus",
]
