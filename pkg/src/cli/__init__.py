from src.cli import cocycle, duality, runner, spectral, spinchain, transport
