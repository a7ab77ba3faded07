from c2f_retrieval.codebook.descriptors import (
    DescriptorError,
    DescriptorSet,
    LocalDescriptor,
)
from c2f_retrieval.codebook.rootsift import root_preprocess, root_preprocess_matrix
from c2f_retrieval.codebook.kmeans import (
    Codebook,
    CodebookTrainingError,
    squared_distances,
    train_kmeans,
)
from c2f_retrieval.codebook.quantize import (
    multi_assign,
    multi_assign_matrix,
    quantize,
    quantize_matrix,
)

__all__ = [
    "DescriptorError",
    "DescriptorSet",
    "LocalDescriptor",
    "root_preprocess",
    "root_preprocess_matrix",
    "Codebook",
    "CodebookTrainingError",
    "squared_distances",
    "train_kmeans",
    "multi_assign",
    "multi_assign_matrix",
    "quantize",
    "quantize_matrix",
]
