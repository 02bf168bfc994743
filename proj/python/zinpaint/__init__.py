"""Exemplar-based inpainting accelerated by z-curve patch indices."""

try:
    from ._zinpaint import (
        inpaint,
        knn_search,
        less_most_significant_bit,
        morton_less,
        subset_layouts,
    )
except ImportError:  # running against an in-tree build
    from _zinpaint import (
        inpaint,
        knn_search,
        less_most_significant_bit,
        morton_less,
        subset_layouts,
    )

__all__ = [
    "inpaint",
    "knn_search",
    "less_most_significant_bit",
    "morton_less",
    "subset_layouts",
]
