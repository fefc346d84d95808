"""doc-mix-instruct (DMI): mieszane instrukcje tłumaczeniowe zdań i dokumentów.

Główny punkt wejścia CLI jest w module ``dmi.cli``.
Uruchamiaj poprzez:

	python -m dmi <command> ...
"""

__version__ = "0.1.0"

__all__: list[str] = ["__version__"]
