"""Embedded English stopword list.

A fixed function-word list so the text pipeline is reproducible offline;
the test suite pins its sha256. Entries are plain [a-z]+ forms of length
>= 2, matching what the tokenizer can emit (clitics like "'s" arrive as
the bare token "s"/"t"/"ll" and are already dropped by the length-2
rule). Membership is tested before stemming.
"""

ENGLISH_STOPWORDS = frozenset(
    """
    about above after again against all also am an and any are aren as at
    be because been before being below between both but by can cannot
    could couldn did didn do does doesn doing don down during each few for
    from further had hadn has hasn have haven having he her here hers
    herself him himself his how if in into is isn it its itself just ll
    me mightn more most mustn my myself needn no nor not now of off on
    once only or other our ours ourselves out over own re same shan she
    should shouldn so some such than that the their theirs them themselves
    then there these they this those through to too under until up ve very
    was wasn we were weren what when where which while who whom why will
    with won would wouldn you your yours yourself yourselves
    """.split()
)
