import esprima
from .extractor import KeywordExtractor


def _template_value(node):
    value = node.value
    if isinstance(value, dict):
        return value.get('cooked')
    return getattr(value, 'cooked', None)


class AstExtractor(KeywordExtractor):
    """Match Identifier, string Literal and template chunks of an esprima tree."""

    def extract(self, body, vocab):
        found = set()

        def visit(node, metadata):
            t = node.type
            if t == 'Identifier':
                if node.name in vocab:
                    found.add(node.name)
            elif t == 'Literal':
                if isinstance(node.value, str) and getattr(node, 'regex', None) is None \
                        and node.value in vocab:
                    found.add(node.value)
            elif t == 'TemplateElement':
                cooked = _template_value(node)
                if cooked in vocab:
                    found.add(cooked)

        esprima.parseScript(body, {'tolerant': True}, visit)
        return found
