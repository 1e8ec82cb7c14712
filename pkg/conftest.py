import pytest

from phr_harness import build_fixture_set
from xml_core import parse
from xmldsig import generate_identity, load_policy


@pytest.fixture(scope="session")
def client_key():
    return generate_identity("TestPatient")


@pytest.fixture(scope="session")
def attacker_key():
    return generate_identity("Attacker")


@pytest.fixture(scope="session")
def policy(client_key):
    return load_policy("phr").with_trust([client_key.certificate.fingerprint])


@pytest.fixture(scope="session")
def fixtures(client_key, attacker_key):
    return build_fixture_set(client=client_key, attacker=attacker_key)


@pytest.fixture(scope="session")
def service_key():
    return generate_identity("PHR Authentication Service")


DATA_MESSAGE = (
    b'<soap:Envelope xmlns:soap="http://www.w3.org/2003/05/soap-envelope" xmlns:my="http://namespace.org/2021/my">'
    b'<soap:Header/>'
    b'<soap:Body><my:Data id="original">transfer 10 EUR</my:Data></soap:Body>'
    b'</soap:Envelope>'
)

DATA_EXPRESSION = (
    '/*[local-name()="Envelope" and namespace-uri()="http://www.w3.org/2003/05/soap-envelope"]'
    '/*[local-name()="Body" and namespace-uri()="http://www.w3.org/2003/05/soap-envelope"]'
    '/*[local-name()="Data" and namespace-uri()="http://namespace.org/2021/my"]'
)


@pytest.fixture
def data_message():
    """Envelope whose Body carries a single my:Data element with id "original"."""
    return parse(DATA_MESSAGE)


@pytest.fixture
def data_expression():
    return DATA_EXPRESSION
