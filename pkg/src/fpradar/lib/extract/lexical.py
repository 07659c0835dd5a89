"""
Comment- and string-aware JavaScript scanner.

It never fails: malformed input degrades to punctuation tokens, which is what
makes it the fallback for syntax-tree extraction.
"""
import re
from .extractor import KeywordExtractor

TOKEN_RE = re.compile(r'''
      (?P<ws>\s+)
    | (?P<comment>//[^\n\r\u2028\u2029]*|/\*[\s\S]*?(?:\*/|\Z))
    | (?P<string>'(?:[^'\\\n]|\\[\s\S])*'?|"(?:[^"\\\n]|\\[\s\S])*"?)
    | (?P<ident>[A-Za-z_$][\w$]*)
    | (?P<number>(?:0[xXoObB][\da-fA-F_]+|(?:\d[\d_]*\.?[\d_]*|\.\d[\d_]*)(?:[eE][+-]?\d+)?)n?)
    | (?P<punct>[\s\S])
''', re.VERBOSE)
ESCAPE_RE = re.compile(r'\\(u\{[0-9a-fA-F]+\}|u[0-9a-fA-F]{4}|x[0-9a-fA-F]{2}|\r\n|[\s\S])')
SIMPLE_ESCAPES = {'n': '\n', 't': '\t', 'r': '\r', 'b': '\b', 'f': '\f', 'v': '\v', '0': '\0'}
# a '/' after these keywords starts a regular expression, not a division
EXPRESSION_KEYWORDS = frozenset(('return', 'typeof', 'instanceof', 'in', 'of', 'new', 'delete',
                                 'void', 'throw', 'case', 'do', 'else', 'yield', 'await'))

STRING = 'string'
IDENT = 'ident'
PUNCT = 'punct'


def unescape(raw):
    def repl(m):
        esc = m.group(1)
        if esc.startswith('u{'):
            code = int(esc[2:-1], 16)
            return chr(code) if code <= 0x10FFFF else m.group()
        if esc[0] in 'ux' and len(esc) > 1:
            return chr(int(esc[1:], 16))
        if esc in ('\n', '\r\n', '\r', '\u2028', '\u2029'):
            return ''
        return SIMPLE_ESCAPES.get(esc, esc)
    return ESCAPE_RE.sub(repl, raw)


class JsTokenizer:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.braces = []
        self.prev = None

    def __iter__(self):
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch == '`':
                self.pos += 1
                yield from self.__template()
                continue
            if ch == '{':
                self.braces.append('{')
            elif ch == '}' and self.braces:
                if self.braces.pop() == '${':
                    self.pos += 1
                    yield from self.__template()
                    continue
            elif ch == '/' and text[self.pos + 1:self.pos + 2] not in ('/', '*') \
                    and self.__regex_allowed() and self.__skip_regex():
                self.prev = ('regex', '')
                continue

            m = TOKEN_RE.match(text, self.pos)
            self.pos = m.end()
            kind = m.lastgroup
            if kind in ('ws', 'comment'):
                continue
            value = m.group()
            if kind == STRING:
                value = unescape(value[1:-1] if len(value) > 1 and value[-1] == value[0]
                                 else value[1:])
            self.prev = (kind, value)
            yield kind, value

    def __regex_allowed(self):
        if self.prev is None:
            return True
        kind, value = self.prev
        if kind == PUNCT:
            return value not in (')', ']', '}')
        if kind == IDENT:
            return value in EXPRESSION_KEYWORDS
        return False

    def __skip_regex(self):
        text = self.text
        i = self.pos + 1
        in_class = False
        while i < len(text):
            c = text[i]
            if c == '\\':
                i += 2
                continue
            if c in '\n\r':
                return False
            if c == '[':
                in_class = True
            elif c == ']':
                in_class = False
            elif c == '/' and not in_class:
                i += 1
                while i < len(text) and (text[i].isalnum() or text[i] == '_'):
                    i += 1
                self.pos = i
                return True
            i += 1
        return False

    def __template(self):
        text = self.text
        start = self.pos
        while self.pos < len(text):
            c = text[self.pos]
            if c == '\\':
                self.pos += 2
            elif c == '`':
                chunk = text[start:self.pos]
                self.pos += 1
                self.prev = (STRING, chunk)
                yield STRING, unescape(chunk)
                return
            elif c == '$' and text[self.pos + 1:self.pos + 2] == '{':
                chunk = text[start:self.pos]
                self.pos += 2
                self.braces.append('${')
                self.prev = (PUNCT, '{')
                yield STRING, unescape(chunk)
                return
            else:
                self.pos += 1
        yield STRING, unescape(text[start:])


def tokenize(text):
    return list(JsTokenizer(text))


class LexicalExtractor(KeywordExtractor):
    def extract(self, body, vocab):
        return {value for kind, value in JsTokenizer(body)
                if kind in (IDENT, STRING) and value in vocab}
