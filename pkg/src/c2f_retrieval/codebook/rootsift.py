import numpy as np

from c2f_retrieval.codebook.descriptors import DescriptorError, LocalDescriptor


def root_preprocess_matrix(values: np.ndarray) -> np.ndarray:
    """
    Row-wise l1 normalisation followed by an element-wise square root.

    Every output row has unit l2 norm.
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if not np.all(np.isfinite(values)):
        raise DescriptorError("descriptor values must be finite")
    if np.any(values < 0):
        raise DescriptorError("root preprocessing requires non-negative descriptors")
    mass = values.sum(axis=1)
    if np.any(mass == 0):
        raise DescriptorError(
            f"{int(np.sum(mass == 0))} all-zero descriptor(s) cannot be normalised"
        )
    return np.sqrt(values / mass[:, None])


def root_preprocess(d: LocalDescriptor) -> LocalDescriptor:
    """rootSIFT mapping of a single descriptor."""
    return LocalDescriptor(
        values=root_preprocess_matrix(d.values[None, :])[0],
        image_id=d.image_id,
        keypoint=d.keypoint,
    )
