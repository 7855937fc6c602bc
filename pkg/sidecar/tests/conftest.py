import socket
import threading
import time

import pytest
import requests
import uvicorn

from anywhere_sidecar import SidecarConfig, create_app


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="session")
def live_server():
    """A real uvicorn instance on a private port, torn down after the session."""
    port = _free_port()
    config = SidecarConfig(port=port)
    server = uvicorn.Server(uvicorn.Config(
        create_app(config), host="127.0.0.1", port=port, log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    base_url = f"http://127.0.0.1:{port}"
    deadline = time.monotonic() + 15
    while time.monotonic() < deadline:
        try:
            if requests.get(base_url + "/v1/health", timeout=1).status_code == 200:
                break
        except requests.RequestException:
            time.sleep(0.05)
    else:
        raise RuntimeError("sidecar did not come up")
    yield base_url
    server.should_exit = True
    thread.join(timeout=10)
