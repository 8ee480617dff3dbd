"""
Count-to-human / human-to-count converter for evaluation budgets.
Decimal suffixes only: k = 10^3, M = 10^6, G = 10^9.
"""

SYMBOLS = {
    'customary'     : ('', 'k', 'M', 'G'),
    'customary_ext' : ('', 'thousand', 'million', 'billion'),
}

def count2human(n, format='%(value).1f%(symbol)s', symbols='customary'):
    """
    Convert a count into a human readable string based on format.

      >>> count2human(0)
      '0'
      >>> count2human(999)
      '999'
      >>> count2human(1000)
      '1.0k'
      >>> count2human(1500000)
      '1.5M'
      >>> count2human(300000, symbols="customary_ext")
      '300.0thousand'
      >>> count2human(2000000000, format="%(value).0f %(symbol)s")
      '2 G'
    """
    n = int(n)
    if n < 0:
        raise ValueError("n < 0")
    symbols = SYMBOLS[symbols]
    for i in reversed(range(1, len(symbols))):
        if n >= 10 ** (3 * i):
            value, symbol = float(n) / 10 ** (3 * i), symbols[i]
            return format % locals()
    return str(n)

def human2count(s):
    """
    Parse an integer count with an optional decimal suffix.  When unable to
    recognize the format ValueError is raised.

      >>> human2count('1000')
      1000
      >>> human2count('100k')
      100000
      >>> human2count('1.5M')
      1500000
      >>> human2count('2 million')
      2000000
      >>> human2count('1K')  # K is an alias for k
      1000
      >>> human2count(25)
      25
      >>> human2count('12 foo')
      Traceback (most recent call last):
          ...
      ValueError: can't interpret '12 foo'
    """
    if isinstance(s, int):
        return s
    init = s = str(s).strip()
    num = ""
    while s and (s[0:1].isdigit() or s[0:1] == '.'):
        num += s[0]
        s = s[1:]
    letter = s.strip()
    if letter == 'K':
        letter = 'k'
    if not num or num == '.':
        raise ValueError("can't interpret %r" % init)
    for sset in SYMBOLS.values():
        if letter in sset:
            value = float(num) * 10 ** (3 * sset.index(letter))
            if value != int(value):
                raise ValueError("can't interpret %r as a whole count" % init)
            return int(value)
    raise ValueError("can't interpret %r" % init)


if __name__ == "__main__":
    import doctest
    doctest.testmod()
