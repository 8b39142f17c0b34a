import pytest

from errors import WireFormatError
from numtheory import (hash_to_int, int_to_bytes, invert, is_prime, is_safe_prime, next_prime, powmod,
                       safe_prime)
from transcript import Transcript
from wire import (KIND_COMMITMENT, KIND_EQ_PROOF, SECTION_COMMITMENTS, SECTION_POKS, WireReader, WireWriter,
                  section_sizes)


def test_powmod_small_and_negative_exponents():
    assert powmod(4, 3, 23) == 18
    assert powmod(9, -1, 23) == invert(9, 23)
    assert powmod(5, 0, 1) == 0
    big = (1 << 521) - 1
    assert powmod(3, big - 1, big) == 1


def test_invert_without_inverse_raises():
    with pytest.raises(ZeroDivisionError):
        invert(6, 9)


def test_primes():
    assert is_prime(23) and not is_prime(21) and not is_prime(1)
    assert next_prime(23) == 29
    assert is_safe_prime(23) and not is_safe_prime(29)


def test_safe_prime_has_requested_size():
    p = safe_prime(64)
    assert p.bit_length() == 64
    assert is_safe_prime(p)


def test_hash_to_int_is_length_prefixed():
    assert hash_to_int(b'ab', b'c') != hash_to_int(b'a', b'bc')
    assert hash_to_int(b'x', bits=300).bit_length() <= 300


def test_int_to_bytes():
    assert int_to_bytes(0) == b'\x00'
    assert int_to_bytes(256) == b'\x01\x00'
    with pytest.raises(ValueError):
        int_to_bytes(-1)


# ====================
# Transcript
# ====================

def test_transcript_is_deterministic_and_label_separated():
    a = Transcript(b'ctzk/a', b'ctx').append_int(b'x', 5).challenge(1000003)
    b = Transcript(b'ctzk/a', b'ctx').append_int(b'x', 5).challenge(1000003)
    c = Transcript(b'ctzk/b', b'ctx').append_int(b'x', 5).challenge(1000003)
    assert a == b
    assert a != c
    assert 0 <= a < 1000003


def test_transcript_context_changes_challenge():
    a = Transcript(b'l', b'uno').append_ints(b'v', [1, 2]).challenge_bits(160)
    b = Transcript(b'l', b'dos').append_ints(b'v', [1, 2]).challenge_bits(160)
    assert a != b
    assert a < (1 << 160)


# ====================
# Formato binario
# ====================

def test_writer_reader_fields():
    data = (WireWriter(KIND_COMMITMENT).write_u8(7).write_u16(300).write_u64(1 << 40)
            .write_int(12345).write_ints([1, 2, 3]).write_bytes(b'abc').getvalue())
    assert data[:2] == bytes([1, KIND_COMMITMENT])
    reader = WireReader(data, KIND_COMMITMENT)
    assert reader.read_u8() == 7
    assert reader.read_u16() == 300
    assert reader.read_u64() == 1 << 40
    assert reader.read_int() == 12345
    assert reader.read_ints() == [1, 2, 3]
    assert reader.read_bytes() == b'abc'
    reader.expect_end()


def test_reader_rejects_wrong_kind_and_truncation():
    data = WireWriter(KIND_COMMITMENT).write_int(9).getvalue()
    with pytest.raises(WireFormatError):
        WireReader(data, KIND_EQ_PROOF)
    with pytest.raises(WireFormatError):
        WireReader(data[:-1], KIND_COMMITMENT).read_int()
    padded = WireReader(data + b"\x00", KIND_COMMITMENT)
    assert padded.read_int() == 9
    with pytest.raises(WireFormatError):
        padded.expect_end()


def test_negative_integers_are_not_serializable():
    with pytest.raises(WireFormatError):
        WireWriter().write_int(-1)


def test_sections_report_their_sizes():
    writer = WireWriter(KIND_EQ_PROOF)
    writer.begin_section(SECTION_COMMITMENTS).write_int(1).write_int(2).end_section()
    writer.begin_section(SECTION_POKS).write_bytes(b'x' * 10).end_section()
    data = writer.getvalue()
    sizes = section_sizes(data, KIND_EQ_PROOF)
    assert sizes == {SECTION_COMMITMENTS: 5 + 10, SECTION_POKS: 5 + 14}
    assert sum(sizes.values()) + 2 == len(data)


def test_unclosed_section_is_an_error():
    writer = WireWriter(KIND_EQ_PROOF).begin_section(SECTION_POKS)
    with pytest.raises(WireFormatError):
        writer.getvalue()
