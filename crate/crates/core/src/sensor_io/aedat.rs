//! AEDAT 2.0 reader and writer.
//!
//! Layout: `#`-prefixed ASCII header lines (the first exactly `#!AER-DAT2.0`),
//! then 8-byte records of a big-endian address word followed by a big-endian
//! microsecond timestamp. Address bits: bit 0 polarity (1 = ON), then x, then
//! y; 7-bit fields for DVS128 (x in bits 1..=7, y in bits 8..=14) and 8-bit
//! fields for DAVIS240 (x in bits 1..=8, y in bits 9..=16).

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{DvsEvent, Polarity, SensorError, SensorGeometry, SensorKind};

pub const MAGIC_LINE: &str = "#!AER-DAT2.0";
const RECORD_BYTES: usize = 8;
const WRAP: u64 = 1 << 32;
const HALF_WRAP: u32 = 1 << 31;

fn field_layout(kind: SensorKind) -> (u32, u32, u32) {
    // (x shift, y shift, field mask)
    match kind {
        SensorKind::Dvs128 => (1, 8, 0x7F),
        SensorKind::Davis240 => (1, 9, 0xFF),
    }
}

pub fn decode_address(address: u32, geometry: SensorGeometry) -> Result<(u16, u16, Polarity), SensorError> {
    let (xs, ys, mask) = field_layout(geometry.kind);
    let x = (address >> xs) & mask;
    let y = (address >> ys) & mask;
    if !geometry.contains(x, y) {
        return Err(SensorError::CoordinateOutOfRange {
            x,
            y,
            width: geometry.width,
            height: geometry.height,
        });
    }
    let polarity = if address & 1 == 1 { Polarity::On } else { Polarity::Off };
    Ok((x as u16, y as u16, polarity))
}

pub fn encode_address(event: &DvsEvent, geometry: SensorGeometry) -> Result<u32, SensorError> {
    let (x, y) = (u32::from(event.x), u32::from(event.y));
    if !geometry.contains(x, y) {
        return Err(SensorError::CoordinateOutOfRange {
            x,
            y,
            width: geometry.width,
            height: geometry.height,
        });
    }
    let (xs, ys, _) = field_layout(geometry.kind);
    let pol = u32::from(event.polarity == Polarity::On);
    Ok((y << ys) | (x << xs) | pol)
}

/// Streaming AEDAT 2.0 decoder. Yields events in file order with 32-bit
/// timestamp wraparound unwrapped.
pub struct AedatReader<R> {
    inner: R,
    geometry: SensorGeometry,
    last_raw: Option<u32>,
    epoch: u64,
    count: u64,
    finished: bool,
}

impl<R: BufRead> AedatReader<R> {
    pub fn new(mut inner: R) -> Result<Self, SensorError> {
        let mut first = Vec::new();
        (&mut inner).take(256).read_until(b'\n', &mut first)?;
        if trim_line(&first) != MAGIC_LINE.as_bytes() {
            return Err(SensorError::MalformedHeader(format!(
                "first line must be `{MAGIC_LINE}`"
            )));
        }

        let mut kind = SensorKind::Dvs128;
        loop {
            let starts_with_hash = matches!(inner.fill_buf()?.first(), Some(b'#'));
            if !starts_with_hash {
                break;
            }
            let mut line = Vec::new();
            inner.read_until(b'\n', &mut line)?;
            let text = String::from_utf8_lossy(trim_line(&line)).into_owned();
            let body = text.trim_start_matches('#').trim();
            if let Some(chip) = body.strip_prefix("chip:") {
                kind = SensorKind::from_chip_name(chip).ok_or_else(|| {
                    SensorError::MalformedHeader(format!("unsupported chip `{}`", chip.trim()))
                })?;
            }
        }

        Ok(AedatReader {
            inner,
            geometry: SensorGeometry::for_kind(kind),
            last_raw: None,
            epoch: 0,
            count: 0,
            finished: false,
        })
    }

    pub fn geometry(&self) -> SensorGeometry {
        self.geometry
    }

    fn next_event(&mut self) -> Result<Option<DvsEvent>, SensorError> {
        let mut record = [0u8; RECORD_BYTES];
        let filled = read_full(&mut self.inner, &mut record)?;
        if filled == 0 {
            return Ok(None);
        }
        if filled < RECORD_BYTES {
            return Err(SensorError::TruncatedEvent {
                events: self.count,
                trailing: filled,
            });
        }
        let address = u32::from_be_bytes([record[0], record[1], record[2], record[3]]);
        let raw = u32::from_be_bytes([record[4], record[5], record[6], record[7]]);
        let (x, y, polarity) = decode_address(address, self.geometry)?;

        if let Some(prev) = self.last_raw {
            if raw < prev {
                if prev - raw > HALF_WRAP {
                    self.epoch += WRAP;
                } else {
                    return Err(SensorError::NonMonotonicTime {
                        index: self.count,
                        previous: self.epoch + u64::from(prev),
                        current: self.epoch + u64::from(raw),
                    });
                }
            }
        }
        self.last_raw = Some(raw);
        self.count += 1;
        Ok(Some(DvsEvent {
            x,
            y,
            t: self.epoch + u64::from(raw),
            polarity,
        }))
    }
}

impl<R: BufRead> Iterator for AedatReader<R> {
    type Item = Result<DvsEvent, SensorError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        match self.next_event() {
            Ok(Some(ev)) => Some(Ok(ev)),
            Ok(None) => {
                self.finished = true;
                None
            }
            Err(e) => {
                self.finished = true;
                Some(Err(e))
            }
        }
    }
}

fn trim_line(line: &[u8]) -> &[u8] {
    let mut end = line.len();
    while end > 0 && matches!(line[end - 1], b'\n' | b'\r') {
        end -= 1;
    }
    &line[..end]
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(k) => filled += k,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Decodes a complete in-memory AEDAT 2.0 byte buffer.
pub fn parse_aedat(bytes: &[u8]) -> Result<(SensorGeometry, Vec<DvsEvent>), SensorError> {
    let reader = AedatReader::new(bytes)?;
    let geometry = reader.geometry();
    let events = reader.collect::<Result<Vec<_>, _>>()?;
    Ok((geometry, events))
}

pub fn read_aedat_file(path: &Path) -> Result<(SensorGeometry, Vec<DvsEvent>), SensorError> {
    let file = File::open(path)?;
    let reader = AedatReader::new(BufReader::new(file))?;
    let geometry = reader.geometry();
    let events = reader.collect::<Result<Vec<_>, _>>()?;
    Ok((geometry, events))
}

/// Writes a header and one record per event.
///
/// Timestamps are stored modulo 2^32, so the sequence must be non-decreasing,
/// start below 2^32 and never jump by 2^31 µs or more between consecutive
/// events; otherwise the reader could not unwrap it back.
pub fn write_aedat<W: Write>(
    mut sink: W,
    geometry: SensorGeometry,
    events: &[DvsEvent],
) -> Result<(), SensorError> {
    let mut body = Vec::with_capacity(events.len() * RECORD_BYTES);
    let mut prev: Option<u64> = None;
    for (index, ev) in events.iter().enumerate() {
        let address = encode_address(ev, geometry)?;
        match prev {
            None if ev.t >= WRAP => return Err(SensorError::UnrepresentableTimestamp { index, t: ev.t }),
            Some(p) if ev.t < p => {
                return Err(SensorError::NonMonotonicTime {
                    index: index as u64,
                    previous: p,
                    current: ev.t,
                })
            }
            Some(p) if ev.t - p >= u64::from(HALF_WRAP) => {
                return Err(SensorError::UnrepresentableTimestamp { index, t: ev.t })
            }
            _ => {}
        }
        prev = Some(ev.t);
        body.extend_from_slice(&address.to_be_bytes());
        body.extend_from_slice(&((ev.t % WRAP) as u32).to_be_bytes());
    }

    write!(sink, "{MAGIC_LINE}\r\n")?;
    write!(sink, "# chip: {}\r\n", geometry.kind.chip_name())?;
    sink.write_all(&body)?;
    sink.flush()?;
    Ok(())
}

pub fn encode_aedat(geometry: SensorGeometry, events: &[DvsEvent]) -> Result<Vec<u8>, SensorError> {
    let mut out = Vec::new();
    write_aedat(&mut out, geometry, events)?;
    Ok(out)
}
