use std::fmt;
use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// A loaded detector reached its draining hub.
    Arrival,
    /// The infected hub finished contacting one peer.
    ContactComplete,
    /// The responder population doubled.
    DoublingTick,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Arrival => "arrival",
            EventKind::ContactComplete => "contact-complete",
            EventKind::DoublingTick => "doubling-tick",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One processed event. `subject` is the detector id for arrivals, the
/// contact ordinal for contacts and the tick number for doublings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    pub subject: u64,
    pub hub: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    records: Vec<EventRecord>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: EventRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, other: &EventLog) {
        self.records.extend_from_slice(&other.records);
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.records.iter().filter(|r| r.kind == kind).count()
    }

    /// `time<TAB>kind<TAB>subject<TAB>hub` per line, times to 9 decimals.
    pub fn write_text<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        for r in &self.records {
            writeln!(out, "{:.9}\t{}\t{}\t{}", r.time, r.kind, r.subject, r.hub)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("log text is ASCII")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_format() {
        let mut log = EventLog::new();
        log.push(EventRecord {
            time: 1.5,
            kind: EventKind::ContactComplete,
            subject: 0,
            hub: 3,
        });
        log.push(EventRecord {
            time: 2.0 / 3.0,
            kind: EventKind::DoublingTick,
            subject: 1,
            hub: 0,
        });
        assert_eq!(
            log.to_text(),
            "1.500000000\tcontact-complete\t0\t3\n0.666666667\tdoubling-tick\t1\t0\n"
        );
    }
}
