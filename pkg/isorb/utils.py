"""! @package utils


"""
import json
import os
import zlib
import logging

import numpy as np

logger = logging.getLogger(__name__)


def json_parser(filename):
    with open(filename) as json_data:
        d = json.load(json_data)
        return d


def canonical_json(dic):
    """! @brief Serializes a JSON-compatible object with sorted keys, 4-space
    indentation and a trailing newline, so equal content gives equal bytes.
    """
    return json.dumps(dic, indent=4, sort_keys=True) + "\n"


def compare_JSON(json1, json2, raise_error=False):
    """! @brief Will compare two JSON strings, and return False if they differ. An
    extra argument can be used to force the function to raise an error with the line
    the difference was observed.
    """
    lines1 = json1.splitlines()
    lines2 = json2.splitlines()
    for linenumber, (line1, line2) in enumerate(zip(lines1, lines2)):
        if line1 != line2:
            if raise_error:
                raise Exception("JSON differs at line: " + str(linenumber))
            return False
    if len(lines1) != len(lines2):
        if raise_error:
            raise Exception("JSON differs in length")
        return False
    return True


def write_string_to_file(string, output_file, output_dir="."):
    """! @brief Write string to file, creating the output directory if needed"""

    if output_dir and not os.path.isdir(output_dir):
        logger.debug("Creating output dir " + output_dir)
        os.makedirs(output_dir)

    joined = os.path.join(output_dir, output_file)
    logger.debug("Writing string to " + joined)

    with open(joined, "w") as strfile:
        strfile.write(string)
    return joined


def seeded_rng(seed, name=""):
    """! @brief Returns a numpy Generator derived from the run seed and a name.

    Each named consumer gets its own independent stream, so adding or
    reordering checks does not change the draws of the others.
    """
    entropy = [int(seed) & 0xFFFFFFFF]
    if name:
        entropy.append(zlib.crc32(name.encode("utf-8")))
    return np.random.default_rng(np.random.SeedSequence(entropy))
