from .builtins import BUILTINS, builtin_manifests  # noqa: F401
