import logging
from typing import Optional

from fastapi import Depends, FastAPI, Request
from fastapi.responses import Response

from config.constants import PHR_POLICY, PHR_SERVER_MODE, PHR_SERVICE_KEY, PHR_TRUST_CERTS, SOAP12_NS, SOAP_CONTENT_TYPE
from phr_harness import AuthenticationService, Rejection, ServerMode
from phr_harness.client import FAULT_REASON_HEADER
from xml_core import QName, XmlDocument, element, serialize, text_node
from xmldsig import load_policy, load_signing_key
from xmldsig.layout import BODY, ENVELOPE

logger = logging.getLogger(__name__)

FAULT = QName("Fault", SOAP12_NS)
CODE = QName("Code", SOAP12_NS)
VALUE = QName("Value", SOAP12_NS)
REASON = QName("Reason", SOAP12_NS)
TEXT = QName("Text", SOAP12_NS)


def soap_fault(rejection: Rejection) -> bytes:
    """SOAP 1.2 Fault whose Reason text is the rejection reason code."""
    fault = element(FAULT, prefix="soap", children=[
        element(CODE, prefix="soap", children=[
            element(VALUE, prefix="soap", children=[text_node("soap:Sender")]),
        ]),
        element(REASON, prefix="soap", children=[
            element(TEXT, prefix="soap", children=[text_node(rejection.reason.value)]),
        ]),
    ])
    envelope = element(ENVELOPE, prefix="soap", namespace_decls=[("soap", SOAP12_NS)], children=[
        element(BODY, prefix="soap", children=[fault]),
    ])
    return serialize(XmlDocument(envelope))


def _soap(payload: bytes, status_code: int = 200, headers: Optional[dict] = None) -> Response:
    return Response(content=payload, status_code=status_code, media_type=SOAP_CONTENT_TYPE, headers=headers)


def service_from_environment() -> AuthenticationService:
    """Build the service from PHR_* settings."""
    policy = load_policy(PHR_POLICY, trust_certs=PHR_TRUST_CERTS)
    mode = ServerMode.hardened(policy) if PHR_SERVER_MODE == "hardened" else ServerMode.naive(policy.trust_anchors)
    key = load_signing_key(PHR_SERVICE_KEY) if PHR_SERVICE_KEY else None
    return AuthenticationService(mode, service_key=key)


async def raw_body(request: Request) -> bytes:
    return await request.body()


def create_app(service: Optional[AuthenticationService] = None) -> FastAPI:
    app = FastAPI(title="PHR authentication service")
    app.state.service = service or service_from_environment()

    # Plain def handlers: FastAPI runs them in its worker thread pool
    @app.post("/LoginCreateChallenge")
    def login_create_challenge():
        return _soap(serialize(app.state.service.login_create_challenge()))

    @app.post("/LoginCreateToken")
    def login_create_token(body: bytes = Depends(raw_body)):
        try:
            assertion = app.state.service.login_create_token(body)
        except Rejection as e:
            return _soap(soap_fault(e), 403, {FAULT_REASON_HEADER: e.reason.value})
        return _soap(serialize(assertion.document))

    return app
