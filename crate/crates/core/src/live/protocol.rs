//! Wire framing: a 4-byte big-endian payload length followed by one JSON
//! object `{"kind": ..., "data": ...}`.

use std::io::{ErrorKind, Read, Write};

use serde::{Deserialize, Serialize};

use super::{Command, Event, Snapshot};
use crate::error::{Error, Result};

/// Largest accepted payload.
pub const MAX_FRAME: usize = 16 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Message {
    Snapshot(Box<Snapshot>),
    Event(Event),
    Command(Command),
    Error { message: String },
}

impl Message {
    pub fn to_frame(&self) -> Result<Vec<u8>> {
        let body = serde_json::to_vec(self)?;
        let mut frame = Vec::with_capacity(body.len() + 4);
        frame.extend_from_slice(&(body.len() as u32).to_be_bytes());
        frame.extend_from_slice(&body);
        Ok(frame)
    }
}

pub fn write_message(w: &mut impl Write, msg: &Message) -> Result<()> {
    w.write_all(&msg.to_frame()?)?;
    w.flush()?;
    Ok(())
}

/// Reads one message; `Ok(None)` on a clean end of stream between frames.
pub fn read_message(r: &mut impl Read) -> Result<Option<Message>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME {
        return Err(Error::Format(format!("frame of {len} bytes exceeds {MAX_FRAME}")));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body)?;
    Ok(Some(serde_json::from_slice(&body)?))
}
