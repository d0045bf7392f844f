"""Pure-Python longest-match scan; the fallback twin of ``_scan.pyx``.

Both implementations must stay behaviourally identical — the test suite
compares them on randomized inputs whenever the compiled kernel built.
"""


def scan(token_ids, first_index, form_flat, form_off):
    """Longest-match left-to-right scan over a token-id sequence.

    ``first_index`` maps a form's first token id to the indices of all
    forms starting with it, sorted by (length descending, index). At each
    position every form tied at the maximal matching length is reported,
    then the scan advances past the match, suppressing shorter matches
    inside it. Unknown tokens carry id -1 and never match.

    Returns ``[(start_position, form_index), ...]``.
    """
    out = []
    n = len(token_ids)
    i = 0
    while i < n:
        candidates = first_index.get(token_ids[i])
        if candidates is not None:
            best_len = 0
            for fidx in candidates:
                a = form_off[fidx]
                b = form_off[fidx + 1]
                flen = b - a
                if best_len and flen < best_len:
                    break
                if flen > n - i:
                    continue
                ok = True
                for k in range(flen):
                    if form_flat[a + k] != token_ids[i + k]:
                        ok = False
                        break
                if ok:
                    if best_len == 0:
                        best_len = flen
                    out.append((i, fidx))
            if best_len:
                i += best_len
                continue
        i += 1
    return out
