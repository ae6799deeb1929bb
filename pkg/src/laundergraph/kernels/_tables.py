import numpy as np

CRC64_POLY = 0xC96C5795D7870F42  # ECMA-182, reflected (CRC-64/XZ)


def _crc64_table():
    table = np.zeros(256, dtype=np.uint64)
    for i in range(256):
        crc = i
        for _ in range(8):
            crc = (crc >> 1) ^ CRC64_POLY if crc & 1 else crc >> 1
        table[i] = crc
    return table


CRC64_TABLE = _crc64_table()
