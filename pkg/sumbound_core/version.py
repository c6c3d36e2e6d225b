"""
sumbound_core.version
---------------------
Keeps track of the sumbound package version.

The version string is embedded in every CSV header comment, so two files
written by the same build can be compared byte for byte.
"""

# Semantic Versioning: MAJOR.MINOR.PATCH
#   - MAJOR: changes to the CSV schema or bound definitions
#   - MINOR: new subcommands, presets, checks
#   - PATCH: small fixes
__version__ = "1.0.0"
