import pytest

from kryode import kernels


@pytest.fixture(params=kernels.available_backends())
def kernel_backend(request):
    """Run the decorated test once per available kernel lane."""
    previous = kernels.active_backend()
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)
