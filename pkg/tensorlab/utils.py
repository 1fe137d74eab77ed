"""
Funções auxiliares do laboratório

Derivação de streams de sementes e medição de tempo.
"""

import functools
import time
from typing import Any, Callable, Optional, TypeVar, Union

import numpy as np

from tensorlab.services.logging import get_logger

logger = get_logger(__name__)

F = TypeVar("F", bound=Callable[..., Any])

SeedLike = Union[int, np.random.Generator]


def stream_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """
    Return the PCG64 generator for one seed stream

    Stream ``k`` of root seed ``s`` is ``SeedSequence(s, spawn_key=(k,))``;
    trial ``k`` of a sweep always draws from stream ``k``, so a record is
    reproducible from (seed, seed_index) alone.

    Args:
        seed: Root 64-bit seed
        stream: Stream index (the trial index in sweeps)

    Returns:
        Independent numpy Generator
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def as_rng(seed: SeedLike) -> np.random.Generator:
    """
    Normalise a seed or generator into a Generator

    Integers map to stream 0 of that seed.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return stream_rng(int(seed), 0)


def timing_decorator(func: F) -> F:
    """
    Decorator para medir tempo de execução

    Args:
        func: Função a ser decorada

    Returns:
        Função decorada
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        try:
            result = func(*args, **kwargs)
            logger.debug("timed", function=func.__name__, seconds=round(time.perf_counter() - start_time, 6))
            return result
        except Exception as e:
            logger.error("timed_failure", function=func.__name__,
                         seconds=round(time.perf_counter() - start_time, 6), error=str(e))
            raise

    return wrapper  # type: ignore[return-value]


class PerformanceMonitor:
    """
    Monitor de tempo para uma operação
    """

    def __init__(self, operation_name: str):
        self.operation_name = operation_name
        self.start_time: Optional[float] = None
        self.end_time: Optional[float] = None

    def __enter__(self) -> "PerformanceMonitor":
        self.start_time = time.perf_counter()
        logger.debug("operation_started", operation=self.operation_name)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.end_time = time.perf_counter()
        seconds = round(self.end_time - self.start_time, 6)

        if exc_type is None:
            logger.debug("operation_finished", operation=self.operation_name, seconds=seconds)
        else:
            logger.error("operation_failed", operation=self.operation_name, seconds=seconds, error=str(exc_val))

    @property
    def elapsed_ms(self) -> float:
        """Milissegundos entre a entrada e a saída (ou até agora, se ainda rodando)"""
        end = self.end_time if self.end_time is not None else time.perf_counter()
        return (end - self.start_time) * 1000.0
