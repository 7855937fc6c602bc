import base64

import requests

from anywhere.conformance import check_all, check_vector, load_vectors
from anywhere_sidecar import SidecarConfig, create_app
from fastapi.testclient import TestClient


def in_process_handler(config=None):
    client = TestClient(create_app(config))

    def handler(path, body):
        reply = client.get(path) if path.endswith("/health") else client.post(path, json=body)
        try:
            payload = reply.json()
        except ValueError:
            payload = {}
        return reply.status_code, payload

    return handler


def http_handler(base_url):
    session = requests.Session()

    def handler(path, body):
        if path.endswith("/health"):
            reply = session.get(base_url + path, timeout=10)
        else:
            reply = session.post(base_url + path, json=body, timeout=60)
        try:
            payload = reply.json()
        except ValueError:
            payload = {}
        return reply.status_code, payload

    return handler


def test_full_pack_passes_in_process():
    results = check_all(in_process_handler())
    failed = [(r.vector_id, r.detail) for r in results if not r.passed]
    assert failed == []


def test_full_pack_passes_over_http(live_server):
    results = check_all(http_handler(live_server))
    failed = [(r.vector_id, r.detail) for r in results if not r.passed]
    assert failed == []
    assert len(results) >= 10


def test_unbound_role_rejected():
    config = SidecarConfig(models={r: "builtin" for r in
                                   ("narrator", "thinker", "ranker", "analyzer",
                                    "segmenter", "template_generator", "refiner")})
    handler = in_process_handler(config)
    vector = next(v for v in load_vectors() if v["id"] == "image_inpaint")
    result = check_vector(vector, handler)
    assert not result.passed
    status, body = handler(vector["path"], vector["request"])
    assert status == 422
    assert "not bound" in body["error"]


def test_health_advertises_bound_roles_only():
    config = SidecarConfig(models={"narrator": "builtin", "segmenter": "builtin"})
    status, body = in_process_handler(config)("/v1/health", {})
    assert status == 200
    assert body["roles"] == ["narrator", "segmenter"]


def test_oversized_payload_rejected():
    handler = in_process_handler(SidecarConfig(max_payload_bytes=1024))
    big = base64.b64encode(b"\x00" * 4096).decode()
    status, _ = handler("/v1/image", {"role": "segmenter", "task": "segment",
                                      "seed": 0, "images": {"image": big}})
    assert status == 422


def test_undecodable_png_rejected():
    handler = in_process_handler()
    garbage = base64.b64encode(b"not a png").decode()
    status, body = handler("/v1/image", {"role": "segmenter", "task": "segment",
                                         "seed": 0, "images": {"image": garbage}})
    assert status == 422
    assert "image" in body["error"]


def test_no_extra_endpoints():
    client = TestClient(create_app())
    assert client.get("/docs").status_code == 404
    assert client.get("/openapi.json").status_code == 404
    assert client.get("/v1/other").status_code in (404, 405)
