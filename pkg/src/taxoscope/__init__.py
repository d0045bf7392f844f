"""taxoscope: ontology-driven literature screening.

A taxonomy-backed screening funnel over bibliographic corpora, term
candidate mining, five-dimension research classification, and a small
RDF knowledge base with a SELECT/BGP query engine.
"""

__version__ = "0.1.0"

from .rdf import Graph, Iri, Literal, Triple  # noqa: F401
from .turtle import parse_turtle, serialize_turtle  # noqa: F401
