//! CRC-11 with generator `x^11 + x^10 + x^9 + x^5 + 1`, zero initial state, bits
//! processed MSB first and the remainder appended MSB first.

pub const CRC_BITS: usize = 11;
/// Generator without the leading `x^11` term.
pub const CRC_POLY: u16 = 0x621;

/// Remainder of `bits * x^11` modulo the generator, as 11 bits MSB first.
pub fn crc11(bits: &[u8]) -> [u8; CRC_BITS] {
    let mut reg: u16 = 0;
    for &b in bits {
        let feedback = ((reg >> (CRC_BITS - 1)) & 1) ^ u16::from(b & 1);
        reg = (reg << 1) & 0x7ff;
        if feedback == 1 {
            reg ^= CRC_POLY;
        }
    }
    let mut out = [0u8; CRC_BITS];
    for (i, o) in out.iter_mut().enumerate() {
        *o = ((reg >> (CRC_BITS - 1 - i)) & 1) as u8;
    }
    out
}

/// `payload` followed by its CRC.
pub fn attach(payload: &[u8]) -> Vec<u8> {
    let mut v = payload.to_vec();
    v.extend_from_slice(&crc11(payload));
    v
}

/// True when the last 11 bits are the CRC of the rest.
pub fn check(block: &[u8]) -> bool {
    if block.len() < CRC_BITS {
        return false;
    }
    let (data, tail) = block.split_at(block.len() - CRC_BITS);
    crc11(data) == tail
}
