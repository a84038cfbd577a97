"""Desk-scale virtual lightstage and 3D-aware latent portrait relighting.

The package is organized as a library: synthetic OLAT capture (`stage`),
environment-map illumination (`illum`), a frozen miniature 3D-aware generator
(`gen3d`), encoder-based inversion (`invert`), latent-space relighting
(`relight`), training utilities (`train`), evaluation (`evalx`), a command
line front end (`cli`) and an interactive HTTP service (`service`).

Submodules that depend on torch are imported lazily; `import relightlab`
alone stays cheap.
"""

__version__ = "0.1.0"

__all__ = [
    "config",
    "util",
    "imageio",
    "stage",
    "illum",
    "gen3d",
    "invert",
    "relight",
    "train",
    "evalx",
    "cli",
    "service",
]
