from gridarena.hashing import canonical_bytes, fnv1a64w, hash_canonical


def test_hash_is_pure():
    obj = {"a": [1, 2, 3], "b": "xyz"}
    assert hash_canonical(obj) == hash_canonical(obj)


def test_hash_depends_on_content():
    assert hash_canonical({"x": 1}) != hash_canonical({"x": 2})
    assert hash_canonical({"x": 1}) != hash_canonical({"y": 1})


def test_canonical_bytes_key_order_free():
    assert canonical_bytes({"a": 1, "b": 2}) == canonical_bytes({"b": 2, "a": 1})


def test_word_folding_matches_manual_computation():
    # 8 zero bytes: one word of 0 folded into the FNV offset basis.
    offset, prime, mask = 0xCBF29CE484222325, 0x100000001B3, (1 << 64) - 1
    assert fnv1a64w(b"\x00" * 8) == (offset * prime) & mask
    # Short input is zero-padded to a full word.
    assert fnv1a64w(b"") == offset
    assert fnv1a64w(b"\x00") == fnv1a64w(b"\x00" * 8)
    word = int.from_bytes(b"abcdefgh", "little")
    assert fnv1a64w(b"abcdefgh") == ((offset ^ word) * prime) & mask


def test_hash_fits_in_64_bits():
    for obj in ({}, [1] * 100, {"deep": {"nest": [True, None, "s"]}}):
        assert 0 <= hash_canonical(obj) < (1 << 64)
