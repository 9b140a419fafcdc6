"""Backend factory with automatic backend discovery."""

import importlib
import inspect
import logging
import pkgutil
from pathlib import Path
from typing import Any, Dict, List, Optional, Type

from ..cache import CoefficientCache
from ..errors import InvalidArgumentError
from .base import BackendMetadata, HydroBackend

logger = logging.getLogger(__name__)

# Cheapest tier first in listings
_TIER_ORDER = ("isolated", "pa", "ms")


class BackendFactory:
    """
    Creates hydrodynamics backends by variant name.

    Any HydroBackend subclass with METADATA in this package is registered
    on first use.
    """

    _backend_registry: Dict[str, Type[HydroBackend]] = {}
    _discovered = False

    @classmethod
    def _discover_backends(cls):
        if cls._discovered:
            return

        backends_dir = Path(__file__).parent

        for module_info in pkgutil.iter_modules([str(backends_dir)]):
            module_name = module_info.name

            if module_name in ("base", "factory", "__init__"):
                continue

            try:
                module = importlib.import_module(f"{__package__}.{module_name}")
            except ImportError as e:
                logger.warning("Failed to load backend from %s: %s", module_name, e)
                continue

            for _, obj in inspect.getmembers(module, inspect.isclass):
                if (
                    issubclass(obj, HydroBackend)
                    and obj is not HydroBackend
                    and obj.METADATA is not None
                ):
                    cls._backend_registry[obj.METADATA.name.lower()] = obj

        cls._discovered = True

    @classmethod
    def create_backend(
        cls,
        name: str,
        cache: Optional[CoefficientCache] = None,
        **options: Any,
    ) -> HydroBackend:
        """
        Create a backend instance.

        Args:
            name: Variant name (isolated, pa or ms)
            cache: Shared coefficient cache
            **options: Constructor options declared in the backend METADATA
                (n_terms, order) plus rho and gravity; None values fall back
                to the declared defaults

        Returns:
            HydroBackend instance

        Raises:
            InvalidArgumentError: If the variant is unknown
        """
        backend_class = cls._lookup(name)
        metadata = backend_class.METADATA

        kwargs: Dict[str, Any] = {}
        for option in metadata.options:
            value = options.get(option["key"])
            kwargs[option["key"]] = value if value is not None else option["default"]
        for key in ("rho", "gravity"):
            if options.get(key) is not None:
                kwargs[key] = options[key]

        return backend_class(cache=cache, **kwargs)

    @classmethod
    def list_available_backends(cls) -> List[BackendMetadata]:
        """Metadata of every registered backend, cheapest tier first."""
        cls._discover_backends()

        def sort_key(meta):
            if meta.name in _TIER_ORDER:
                return (_TIER_ORDER.index(meta.name), meta.name)
            return (len(_TIER_ORDER), meta.name)

        return sorted(
            (backend.METADATA for backend in cls._backend_registry.values()), key=sort_key
        )

    @classmethod
    def get_backend_metadata(cls, name: str) -> BackendMetadata:
        return cls._lookup(name).METADATA

    @classmethod
    def _lookup(cls, name: str) -> Type[HydroBackend]:
        cls._discover_backends()
        key = str(name).lower()
        if key not in cls._backend_registry:
            available = ", ".join(m.name for m in cls.list_available_backends())
            raise InvalidArgumentError(
                f"Unknown backend: {name}. Available backends: {available}"
            )
        return cls._backend_registry[key]
