import inspect

import httpx
import pytest
from fastapi.routing import APIRoute
from fastapi.testclient import TestClient

from app import create_app
from attack_forge import AttackKind, AttackVariant, forge
from phr_harness import (
    AuthenticationService,
    PhrClient,
    Rejection,
    RejectionReason,
    ServerMode,
    capture_id_signed_request,
    client_sign_challenge,
    read_challenge_response,
    verify_assertion,
)
from phr_harness.client import FAULT_REASON_HEADER
from xml_core import parse, serialize


@pytest.fixture
def service(policy, service_key):
    return AuthenticationService(ServerMode.hardened(policy), service_key=service_key)


@pytest.fixture
def http(service):
    return TestClient(create_app(service))


def new_challenge(http: TestClient) -> str:
    response = http.post("/LoginCreateChallenge")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("application/soap+xml")
    return read_challenge_response(parse(response.content))


def test_login_flow(http, client_key, policy, service_key):
    request = client_sign_challenge(new_challenge(http), client_key, policy)
    response = http.post("/LoginCreateToken", content=serialize(request))
    assert response.status_code == 200
    assertion = verify_assertion(parse(response.content), service_key.certificate)
    assert assertion.subject.common_name == "TestPatient"

    replay = http.post("/LoginCreateToken", content=serialize(request))
    assert replay.status_code == 403
    assert replay.headers[FAULT_REASON_HEADER] == "challenge-replayed"


def test_attack_gets_a_soap_fault(http, client_key, attacker_key):
    captured = capture_id_signed_request(new_challenge(http), client_key)
    forged = forge(captured, AttackVariant(AttackKind.SIMPLE_ANCESTRY_CERTIFICATE, attacker_key.certificate.der))
    response = http.post("/LoginCreateToken", content=serialize(forged))
    assert response.status_code == 403
    assert response.headers[FAULT_REASON_HEADER] == "signature-invalid"
    fault = parse(response.content)
    assert fault.root.name.local_name == "Envelope"
    assert "signature-invalid" in response.text
    assert "Fault" in response.text


def test_malformed_body(http):
    response = http.post("/LoginCreateToken", content=b"not xml")
    assert response.status_code == 403
    assert response.headers[FAULT_REASON_HEADER] == "malformed-request"


def forwarding_transport(http: TestClient) -> httpx.MockTransport:
    def handle(request: httpx.Request) -> httpx.Response:
        response = http.request(request.method, request.url.path, content=request.content, headers=request.headers)
        return httpx.Response(response.status_code, headers=response.headers, content=response.content)
    return httpx.MockTransport(handle)


def test_client_logs_in_over_http(http, client_key, policy, service_key):
    with PhrClient("http://phr.test", client_key, policy, transport=forwarding_transport(http)) as client:
        assertion = client.login(service_key.certificate)
    assert verify_assertion(assertion, service_key.certificate).subject.common_name == "TestPatient"


def test_client_surfaces_rejections(http, attacker_key, policy):
    with PhrClient("http://phr.test", attacker_key, policy, transport=forwarding_transport(http)) as client:
        with pytest.raises(Rejection) as info:
            client.login()
    assert info.value.reason is RejectionReason.UNTRUSTED_CERTIFICATE


def test_soap_handlers_run_off_the_event_loop(service):
    app = create_app(service)
    endpoints = {route.path: route.endpoint for route in app.routes if isinstance(route, APIRoute)}
    for path in ("/LoginCreateChallenge", "/LoginCreateToken"):
        assert not inspect.iscoroutinefunction(endpoints[path]), path
