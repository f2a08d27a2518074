"""Porter stemming algorithm (the classic 1980 formulation).

Suffix-stripping in five ordered steps over the measure m of a word,
where a word is decomposed as [C](VC)^m[V]. Within a step the longest
matching suffix decides the rule; if its condition fails, no other rule
in that step fires. Inputs are expected to be lowercase a-z strings;
words of length <= 2 are returned unchanged.
"""

_VOWELS = frozenset("aeiou")


class _Stemmer:
    """Working state: the buffer b, end index k, and condition split j."""

    def __init__(self, word):
        self.b = list(word)
        self.k = len(word) - 1
        self.j = 0

    def cons(self, i):
        ch = self.b[i]
        if ch in _VOWELS:
            return False
        if ch == "y":
            return True if i == 0 else not self.cons(i - 1)
        return True

    def m(self):
        # number of VC sequences in b[0..j]
        n = 0
        i = 0
        while True:
            if i > self.j:
                return n
            if not self.cons(i):
                break
            i += 1
        i += 1
        while True:
            while True:
                if i > self.j:
                    return n
                if self.cons(i):
                    break
                i += 1
            i += 1
            n += 1
            while True:
                if i > self.j:
                    return n
                if not self.cons(i):
                    break
                i += 1
            i += 1

    def vowel_in_stem(self):
        return any(not self.cons(i) for i in range(self.j + 1))

    def doublec(self, j):
        if j < 1:
            return False
        return self.b[j] == self.b[j - 1] and self.cons(j)

    def cvc(self, i):
        # consonant-vowel-consonant ending at i, last consonant not w/x/y
        if i < 2 or not self.cons(i) or self.cons(i - 1) or not self.cons(i - 2):
            return False
        return self.b[i] not in ("w", "x", "y")

    def ends(self, s):
        n = len(s)
        if n > self.k + 1:
            return False
        if "".join(self.b[self.k - n + 1 : self.k + 1]) != s:
            return False
        self.j = self.k - n
        return True

    def setto(self, s):
        self.b[self.j + 1 : self.k + 1] = list(s)
        self.k = self.j + len(s)

    def r(self, s):
        if self.m() > 0:
            self.setto(s)

    def step1ab(self):
        if self.b[self.k] == "s":
            if self.ends("sses"):
                self.k -= 2
            elif self.ends("ies"):
                self.setto("i")
            elif self.b[self.k - 1] != "s":
                self.k -= 1
        if self.ends("eed"):
            if self.m() > 0:
                self.k -= 1
        elif (self.ends("ed") or self.ends("ing")) and self.vowel_in_stem():
            self.k = self.j
            if self.ends("at"):
                self.setto("ate")
            elif self.ends("bl"):
                self.setto("ble")
            elif self.ends("iz"):
                self.setto("ize")
            elif self.doublec(self.k):
                self.k -= 1
                if self.b[self.k] in ("l", "s", "z"):
                    self.k += 1
            elif self.m() == 1 and self.cvc(self.k):
                self.setto("e")

    def step1c(self):
        if self.ends("y") and self.vowel_in_stem():
            self.b[self.k] = "i"

    # (suffix, replacement) lists keyed by the word's penultimate letter,
    # longest suffix first inside each bucket
    _STEP2 = {
        "a": (("ational", "ate"), ("tional", "tion")),
        "c": (("enci", "ence"), ("anci", "ance")),
        "e": (("izer", "ize"),),
        "l": (("abli", "able"), ("entli", "ent"), ("ousli", "ous"), ("alli", "al"), ("eli", "e")),
        "o": (("ization", "ize"), ("ation", "ate"), ("ator", "ate")),
        "s": (("iveness", "ive"), ("fulness", "ful"), ("ousness", "ous"), ("alism", "al")),
        "t": (("biliti", "ble"), ("aliti", "al"), ("iviti", "ive")),
    }

    _STEP3 = {
        "e": (("icate", "ic"), ("alize", "al"), ("ative", "")),
        "i": (("iciti", "ic"),),
        "l": (("ical", "ic"), ("ful", "")),
        "s": (("ness", ""),),
    }

    def _apply_table(self, table, key_index):
        rules = table.get(self.b[self.k - key_index], ())
        for suffix, repl in rules:
            if self.ends(suffix):
                self.r(repl)
                return

    def step2(self):
        if self.k > 0:
            self._apply_table(self._STEP2, 1)

    def step3(self):
        self._apply_table(self._STEP3, 0)

    _STEP4 = {
        "a": ("al",),
        "c": ("ance", "ence"),
        "e": ("er",),
        "i": ("ic",),
        "l": ("able", "ible"),
        "n": ("ement", "ment", "ent", "ant"),
        "o": ("ion", "ou"),
        "s": ("ism",),
        "t": ("ate", "iti"),
        "u": ("ous",),
        "v": ("ive",),
        "z": ("ize",),
    }

    def step4(self):
        if self.k == 0:
            return
        for suffix in self._STEP4.get(self.b[self.k - 1], ()):
            if self.ends(suffix):
                if suffix == "ion" and not (self.j >= 0 and self.b[self.j] in ("s", "t")):
                    return
                if self.m() > 1:
                    self.k = self.j
                return

    def step5(self):
        self.j = self.k
        if self.b[self.k] == "e":
            a = self.m()
            if a > 1 or (a == 1 and not self.cvc(self.k - 1)):
                self.k -= 1
        if self.b[self.k] == "l" and self.doublec(self.k) and self.m() > 1:
            self.k -= 1

    def run(self):
        if self.k <= 1:
            return "".join(self.b)
        self.step1ab()
        self.step1c()
        self.step2()
        self.step3()
        self.step4()
        self.step5()
        return "".join(self.b[: self.k + 1])


def stem(word):
    """Stem one lowercase word."""
    return _Stemmer(word).run()
