import os
import logging
from collections import OrderedDict

from isorb.exceptions import InvalidSpaceParams, SchemaError
from isorb.sphere import SpaceParams


class RunConfig(object):
    """Class for containing the parameters, tolerances and output settings of a run"""

    default_val = OrderedDict(
        [
            ("n", 4),
            ("p", 1),
            ("q", 1),
            ("seed", 0),
            ("samples", 200),
            ("mu_range", 3),
            ("cutoff", 10.0),
            ("workers", 1),
            ("timestamp", False),
            ("output_path", "report.json"),
        ]
    )

    default_tolerances = OrderedDict(
        [
            ("validation", 1e-12),
            ("rank", 1e-8),
            ("isospectral", 1e-8),
            ("algebraic", 1e-11),
            ("volume", 1e-9),
            ("gram", 1e-9),
            ("area", 1e-10),
            ("spectrum", 1e-10),
            ("closed_form", 1e-5),
            ("kahler_equality", 1e-6),
            ("intertwining", 1e-8),
            ("fd_step", 1e-3),
        ]
    )

    descriptions = {
        "n": "Dimension n",
        "p": "Weight p",
        "q": "Weight q",
        "seed": "Seed",
        "samples": "Sample count",
        "mu_range": "Window of the lattice functionals",
        "cutoff": "Spectrum cutoff",
        "workers": "Worker count",
        "timestamp": "Timestamp setting",
        "output_path": "Output path",
    }

    def __init__(self, json_path=None, settings=None):
        self.logger = logging.getLogger(__name__)

        if json_path is None and settings is None:
            self.logger.info("No input to RunConfig. Using default settings.")
            settings = {}
            self.config_dir = ""
        else:
            self.config_dir = os.path.dirname(json_path) if json_path else ""
            if not isinstance(settings, dict):
                raise SchemaError("<root>", "configuration must be a JSON object")

        unknown = set(settings) - set(self.default_val) - {"tolerances"}
        if unknown:
            raise SchemaError(sorted(unknown)[0], "unknown configuration field")

        for key, default in self.default_val.items():
            if key not in settings:
                if json_path is not None or settings:
                    self.logger.info(
                        "{} not specified. Choosing default: {}".format(
                            self.descriptions[key], default
                        )
                    )
                setattr(self, key, default)
            else:
                setattr(self, key, settings[key])

        self.tolerances = OrderedDict(self.default_tolerances)
        given = settings.get("tolerances", {})
        if not isinstance(given, dict):
            raise SchemaError("tolerances", "must be a JSON object")
        for key, value in given.items():
            if key not in self.default_tolerances:
                raise SchemaError("tolerances." + key, "unknown tolerance")
            self.tolerances[key] = value

        self.validate()

    def override(self, **flags):
        """Applies command line flags; None means the flag was not given"""
        for key, value in flags.items():
            if value is None:
                continue
            if key not in self.default_val:
                raise SchemaError(key, "unknown configuration field")
            self.logger.debug("Command line sets {} = {}".format(key, value))
            setattr(self, key, value)
        self.validate()

    def validate(self):
        for key in ("n", "p", "q", "seed", "samples", "mu_range", "workers"):
            value = getattr(self, key)
            if not isinstance(value, int) or isinstance(value, bool):
                raise SchemaError(key, "must be an integer")
        if self.samples < 1:
            raise SchemaError("samples", "must be >= 1")
        if self.mu_range < 1:
            raise SchemaError("mu_range", "must be >= 1")
        if self.workers < 1:
            raise SchemaError("workers", "must be >= 1")
        if not isinstance(self.cutoff, (int, float)) or self.cutoff < 0:
            raise SchemaError("cutoff", "must be a non-negative number")
        self.cutoff = float(self.cutoff)
        if not isinstance(self.timestamp, bool):
            raise SchemaError("timestamp", "must be true or false")
        if not isinstance(self.output_path, str) or not self.output_path:
            raise SchemaError("output_path", "must be a non-empty string")
        for key, value in self.tolerances.items():
            if (
                not isinstance(value, (int, float))
                or isinstance(value, bool)
                or value <= 0
            ):
                raise SchemaError("tolerances." + key, "must be a positive number")
        try:
            self.params = SpaceParams(self.n, self.p, self.q)
        except InvalidSpaceParams as e:
            raise SchemaError("n/p/q", str(e).strip())

    def tolerance(self, name):
        return self.tolerances[name]

    def return_JSON(self):
        json = OrderedDict()
        for key in self.default_val:
            json[key] = getattr(self, key)
        json["tolerances"] = OrderedDict(self.tolerances)
        return json
