use std::io::{self, Read, Write};
use std::net::TcpStream;
use std::time::Duration;

use tungstenite::{Message, WebSocket};

/// How long a fresh connection may stay quiet before it is treated as a
/// plain line-delimited client.
const SNIFF_TIMEOUT: Duration = Duration::from_millis(200);
pub(crate) const POLL_INTERVAL: Duration = Duration::from_millis(10);

/// Text-message channel over either newline-delimited TCP or a WebSocket.
pub(crate) enum Transport {
    Lines { stream: TcpStream, pending: Vec<u8> },
    Ws(Box<WebSocket<TcpStream>>),
}

fn is_timeout(e: &io::Error) -> bool {
    matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut)
}

impl Transport {
    /// Picks the transport from the first bytes: an HTTP upgrade request
    /// starts a WebSocket, anything else (or silence) is line mode.
    pub fn accept(stream: TcpStream) -> io::Result<Self> {
        stream.set_nodelay(true)?;
        stream.set_read_timeout(Some(SNIFF_TIMEOUT))?;
        let mut head = [0u8; 4];
        let is_ws = match stream.peek(&mut head) {
            Ok(n) => n == 4 && &head == b"GET ",
            Err(e) if is_timeout(&e) => false,
            Err(e) => return Err(e),
        };
        if is_ws {
            stream.set_read_timeout(None)?;
            let ws = tungstenite::accept(stream).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
            ws.get_ref().set_read_timeout(Some(POLL_INTERVAL))?;
            Ok(Transport::Ws(Box::new(ws)))
        } else {
            stream.set_read_timeout(Some(POLL_INTERVAL))?;
            Ok(Transport::Lines {
                stream,
                pending: Vec::new(),
            })
        }
    }

    pub fn send(&mut self, text: &str) -> io::Result<()> {
        match self {
            Transport::Lines { stream, .. } => {
                let mut buf = Vec::with_capacity(text.len() + 1);
                buf.extend_from_slice(text.as_bytes());
                buf.push(b'\n');
                stream.write_all(&buf)
            }
            Transport::Ws(ws) => ws.send(Message::text(text)).map_err(ws_err),
        }
    }

    /// Waits up to one poll interval. `Ok(None)` means the peer closed.
    pub fn poll(&mut self) -> io::Result<Option<Vec<String>>> {
        match self {
            Transport::Lines { stream, pending } => {
                let mut buf = [0u8; 4096];
                match stream.read(&mut buf) {
                    Ok(0) => return Ok(None),
                    Ok(n) => pending.extend_from_slice(&buf[..n]),
                    Err(e) if is_timeout(&e) => {}
                    Err(e) => return Err(e),
                }
                let mut lines = Vec::new();
                while let Some(pos) = pending.iter().position(|&b| b == b'\n') {
                    let line: Vec<u8> = pending.drain(..=pos).collect();
                    let text = String::from_utf8_lossy(&line[..pos]).trim().to_string();
                    if !text.is_empty() {
                        lines.push(text);
                    }
                }
                Ok(Some(lines))
            }
            Transport::Ws(ws) => match ws.read() {
                Ok(Message::Text(t)) => Ok(Some(vec![t.to_string()])),
                Ok(Message::Binary(b)) => Ok(Some(vec![String::from_utf8_lossy(&b).into_owned()])),
                Ok(Message::Close(_)) => Ok(None),
                Ok(_) => Ok(Some(Vec::new())),
                Err(tungstenite::Error::Io(e)) if is_timeout(&e) => Ok(Some(Vec::new())),
                Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => Ok(None),
                Err(e) => Err(ws_err(e)),
            },
        }
    }

    pub fn close(&mut self) {
        match self {
            Transport::Lines { stream, .. } => {
                let _ = stream.shutdown(std::net::Shutdown::Both);
            }
            Transport::Ws(ws) => {
                let _ = ws.close(None);
                let _ = ws.flush();
            }
        }
    }
}

fn ws_err(e: tungstenite::Error) -> io::Error {
    match e {
        tungstenite::Error::Io(e) => e,
        other => io::Error::other(other.to_string()),
    }
}
