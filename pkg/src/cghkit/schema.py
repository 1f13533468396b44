"""Default hologram-generation parameter tree.

The registry below is the single source of truth for option names, ranges
and defaults; the frozen dump shipped with the test suite pins its exact
serialized form. Paths are lowercase kebab-case, e.g.
``algorithm/run/algorithm``.
"""

from .hierarchy import (
    BooleanOption,
    BooleanOptionWithChildren,
    DoubleOption,
    Folder,
    HierarchyVersion,
    IntegerOption,
    OptionTree,
    Page,
    Possibility,
    Root,
    SelectOption,
)

SCHEMA_VERSION = HierarchyVersion(1, 0, 0)

# Sentinels understood by the controller: seed 0 draws a fresh seed and
# records it; initial temperature -1 calibrates from warm-up proposals.
AUTO_SEED = 0
AUTO_TEMPERATURE = -1.0

PATH_RESOLUTION_X = "projector/slm/slm-resolution-x"
PATH_RESOLUTION_Y = "projector/slm/slm-resolution-y"
PATH_SLM_TYPE = "projector/slm/slm-type"
PATH_WAVELENGTH = "projector/slm/wavelength"
PATH_PITCH_X = "projector/slm/pixel-pitch-x"
PATH_PITCH_Y = "projector/slm/pixel-pitch-y"
PATH_PROPAGATION = "projector/slm/propagation"
PATH_FRESNEL_DISTANCE = "projector/slm/propagation/fresnel/distance"
PATH_ALGORITHM = "algorithm/run/algorithm"
PATH_SEED = "algorithm/run/seed"
PATH_INIT_MODE = "algorithm/run/init-mode"
PATH_RESCALE_ERROR = "algorithm/run/rescale-error"
PATH_TARGET_REGION = "algorithm/run/target-region"


def build_schema() -> OptionTree:
    """Construct the default tree with every option at its schema default."""
    slm_folder = Folder(
        "slm",
        "Spatial light modulator geometry and modulation scheme",
        options=[
            IntegerOption(
                "slm-resolution-x",
                "Horizontal resolution of the modulator in pixels",
                minimum=2,
                maximum=16384,
                default=512,
            ),
            IntegerOption(
                "slm-resolution-y",
                "Vertical resolution of the modulator in pixels",
                minimum=2,
                maximum=16384,
                default=512,
            ),
            SelectOption(
                "slm-type",
                "Modulation scheme of the target device",
                possibilities=[
                    Possibility(
                        "phase-only",
                        "Unit-modulus modulation with evenly spaced phase levels",
                        children=[
                            IntegerOption(
                                "phase-levels",
                                "Number of addressable phase levels",
                                minimum=2,
                                maximum=1 << 20,
                                default=256,
                            ),
                            DoubleOption(
                                "phase-offset",
                                "Offset of the first phase level in radians",
                                minimum=-6.283185307179586,
                                maximum=6.283185307179586,
                                default=0.0,
                            ),
                        ],
                    ),
                    Possibility("binary-phase", "Two phase levels at 0 and pi"),
                    Possibility(
                        "amplitude",
                        "Real amplitude modulation with evenly spaced levels",
                        children=[
                            IntegerOption(
                                "amplitude-levels",
                                "Number of addressable amplitude levels",
                                minimum=2,
                                maximum=1 << 20,
                                default=256,
                            ),
                        ],
                    ),
                    Possibility(
                        "multi-amp",
                        "Complex states on an amplitude-by-phase grid",
                        children=[
                            IntegerOption(
                                "amplitude-levels",
                                "Number of amplitude rings including zero",
                                minimum=2,
                                maximum=256,
                                default=4,
                            ),
                            IntegerOption(
                                "phase-levels",
                                "Number of phase spokes per amplitude ring",
                                minimum=1,
                                maximum=256,
                                default=2,
                            ),
                        ],
                    ),
                ],
            ),
            DoubleOption(
                "wavelength",
                "Illumination wavelength in meters",
                minimum=1e-8,
                maximum=1e-5,
                default=5.32e-7,
            ),
            DoubleOption(
                "pixel-pitch-x",
                "Horizontal pixel pitch in meters",
                minimum=1e-7,
                maximum=1e-3,
                default=8e-6,
            ),
            DoubleOption(
                "pixel-pitch-y",
                "Vertical pixel pitch in meters",
                minimum=1e-7,
                maximum=1e-3,
                default=8e-6,
            ),
            SelectOption(
                "propagation",
                "Transform relating the modulator plane to the replay plane",
                possibilities=[
                    Possibility("fourier", "Far-field transform (lens focal plane)"),
                    Possibility(
                        "fresnel",
                        "Single-transform near-field propagation",
                        children=[
                            DoubleOption(
                                "distance",
                                "Propagation distance in meters (nonzero)",
                                minimum=-1000.0,
                                maximum=1000.0,
                                default=0.1,
                            ),
                        ],
                    ),
                ],
            ),
        ],
    )

    run_folder = Folder(
        "run",
        "Algorithm selection and run control",
        options=[
            SelectOption(
                "algorithm",
                "Hologram generation algorithm",
                possibilities=[
                    Possibility(
                        "gs",
                        "Iterative transform phase retrieval with optional feedback",
                        children=[
                            IntegerOption(
                                "iterations",
                                "Number of projection iterations",
                                minimum=1,
                                maximum=1_000_000,
                                default=100,
                            ),
                            DoubleOption(
                                "feedback-gain",
                                "Replay feedback gain; 0 is plain error reduction",
                                minimum=0.0,
                                maximum=10.0,
                                default=0.0,
                            ),
                            BooleanOption(
                                "quantize-each-iteration",
                                "Snap the hologram to device states every iteration",
                                default=False,
                            ),
                        ],
                    ),
                    Possibility(
                        "sa",
                        "Simulated annealing over quantized pixel states",
                        children=[
                            IntegerOption(
                                "proposals",
                                "Number of single-pixel proposals",
                                minimum=1,
                                maximum=1_000_000_000,
                                default=20000,
                            ),
                            DoubleOption(
                                "initial-temperature",
                                "Start temperature; -1 calibrates from warm-up proposals",
                                minimum=-1.0,
                                maximum=1e6,
                                default=AUTO_TEMPERATURE,
                            ),
                            DoubleOption(
                                "cooling-factor",
                                "Geometric cooling factor per proposal",
                                minimum=1e-9,
                                maximum=1.0,
                                default=0.99995,
                            ),
                        ],
                    ),
                    Possibility(
                        "dbs",
                        "Direct binary search accepting only improvements",
                        children=[
                            IntegerOption(
                                "max-passes",
                                "Maximum number of full passes over the hologram",
                                minimum=1,
                                maximum=10_000,
                                default=10,
                            ),
                            SelectOption(
                                "scan-order",
                                "Pixel visiting order within a pass",
                                possibilities=[
                                    Possibility("raster", "Row-major scan"),
                                    Possibility("random", "Fresh seeded permutation per pass"),
                                ],
                            ),
                        ],
                    ),
                    Possibility(
                        "ospr",
                        "Averaged one-step phase retrieval subframes",
                        children=[
                            IntegerOption(
                                "subframes",
                                "Number of independently randomized subframes",
                                minimum=1,
                                maximum=1024,
                                default=8,
                            ),
                        ],
                    ),
                ],
            ),
            IntegerOption(
                "seed",
                "Run seed; 0 draws a fresh seed and records it",
                minimum=0,
                maximum=(1 << 64) - 1,
                default=AUTO_SEED,
            ),
            SelectOption(
                "init-mode",
                "Starting hologram construction",
                possibilities=[
                    Possibility("random-phase", "Illumination amplitude with random phase"),
                    Possibility("backpropagate", "Inverse-propagated target phase"),
                ],
            ),
            BooleanOption(
                "rescale-error",
                "Apply a least-squares amplitude scale before the error metric",
                default=False,
            ),
            BooleanOptionWithChildren(
                "target-region",
                "Restrict the error metric to a rectangular signal region",
                default=False,
                children=[
                    IntegerOption(
                        "region-x",
                        "Left edge of the signal region in pixels",
                        minimum=0,
                        maximum=16384,
                        default=0,
                    ),
                    IntegerOption(
                        "region-y",
                        "Top edge of the signal region in pixels",
                        minimum=0,
                        maximum=16384,
                        default=0,
                    ),
                    IntegerOption(
                        "region-width",
                        "Width of the signal region in pixels",
                        minimum=1,
                        maximum=16384,
                        default=256,
                    ),
                    IntegerOption(
                        "region-height",
                        "Height of the signal region in pixels",
                        minimum=1,
                        maximum=16384,
                        default=256,
                    ),
                ],
            ),
        ],
    )

    root = Root(
        "options",
        "Hologram generation options",
        pages=[
            Page("projector", "Projector and modulator settings", folders=[slm_folder]),
            Page("algorithm", "Algorithm settings", folders=[run_folder]),
        ],
    )
    return OptionTree(SCHEMA_VERSION, root)
