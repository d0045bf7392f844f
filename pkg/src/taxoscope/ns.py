"""Namespace constants and the prefix conventions used across the project."""

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
XSD = "http://www.w3.org/2001/XMLSchema#"

AI4ST = "http://purl.org/ai4st/ontology#"
STC = "http://purl.org/stc/ontology#"
PAPERS = "http://purl.org/ai4st/papers#"

STANDARD_PREFIXES = {
    "rdf": RDF,
    "rdfs": RDFS,
    "owl": OWL,
    "xsd": XSD,
    "ai4st": AI4ST,
    "stc": STC,
}
