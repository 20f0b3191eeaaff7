use std::io::{Cursor, ErrorKind};
use std::path::Path;

use hound::{SampleFormat as HoundFormat, WavReader, WavSpec, WavWriter};

use super::AudioBuffer;
use crate::{Error, Result};

/// Sample encoding used when writing WAV files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    /// 16-bit little-endian PCM. Samples are clamped and rounded, no dither.
    Pcm16,
    /// 32-bit IEEE float.
    Float32,
}

const PCM16_SCALE: f64 = 32768.0;

fn map_hound(err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) if e.kind() == ErrorKind::UnexpectedEof => {
            Error::Parse("truncated WAV container".into())
        }
        hound::Error::IoError(e) => Error::Parse(format!("WAV read failed: {e}")),
        hound::Error::FormatError(m) => Error::Parse(format!("malformed WAV: {m}")),
        hound::Error::UnfinishedSample => Error::Parse("truncated WAV sample data".into()),
        hound::Error::Unsupported | hound::Error::TooWide => {
            Error::Format("unsupported WAV encoding".into())
        }
        hound::Error::InvalidSampleFormat => Error::Format("invalid WAV sample format".into()),
    }
}

/// Decodes a RIFF/WAVE byte stream holding 16-bit PCM or 32-bit float audio
/// with one or two channels. 16-bit sample `n` becomes `n / 32768`.
pub fn read_wav(bytes: &[u8]) -> Result<AudioBuffer> {
    let reader = WavReader::new(Cursor::new(bytes)).map_err(map_hound)?;
    let spec = reader.spec();
    let num_channels = spec.channels as usize;
    if num_channels == 0 || num_channels > AudioBuffer::MAX_CHANNELS {
        return Err(Error::Format(format!(
            "{num_channels} channels; only mono and stereo are supported"
        )));
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (HoundFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / PCM16_SCALE))
            .collect::<Result<_, _>>()
            .map_err(map_hound)?,
        (HoundFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<Result<_, _>>()
            .map_err(map_hound)?,
        (format, bits) => {
            return Err(Error::Format(format!(
                "{bits}-bit {} samples; expected 16-bit PCM or 32-bit float",
                match format {
                    HoundFormat::Int => "integer",
                    HoundFormat::Float => "float",
                }
            )))
        }
    };
    if !interleaved.len().is_multiple_of(num_channels) {
        return Err(Error::Parse("truncated WAV sample data".into()));
    }

    let frames = interleaved.len() / num_channels;
    let mut channels = vec![Vec::with_capacity(frames); num_channels];
    for frame in interleaved.chunks_exact(num_channels) {
        for (ch, &s) in channels.iter_mut().zip(frame) {
            ch.push(s);
        }
    }
    AudioBuffer::new(spec.sample_rate, channels)
}

pub fn read_wav_file(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_wav(&bytes).map_err(|e| e.context(path.display()))
}

fn quantize_pcm16(v: f64) -> i16 {
    (v.clamp(-1.0, 1.0 - 1.0 / PCM16_SCALE) * PCM16_SCALE).round() as i16
}

/// Encodes the buffer as a RIFF/WAVE byte stream.
pub fn write_wav(buffer: &AudioBuffer, format: SampleFormat) -> Vec<u8> {
    let (bits_per_sample, sample_format) = match format {
        SampleFormat::Pcm16 => (16, HoundFormat::Int),
        SampleFormat::Float32 => (32, HoundFormat::Float),
    };
    let spec = WavSpec {
        channels: buffer.num_channels() as u16,
        sample_rate: buffer.sample_rate(),
        bits_per_sample,
        sample_format,
    };

    let mut cursor = Cursor::new(Vec::new());
    {
        // Writing into memory cannot fail short of allocation failure.
        let mut writer = WavWriter::new(&mut cursor, spec).expect("in-memory WAV header");
        for i in 0..buffer.len() {
            for ch in buffer.channels() {
                match format {
                    SampleFormat::Pcm16 => writer.write_sample(quantize_pcm16(ch[i])),
                    SampleFormat::Float32 => writer.write_sample(ch[i] as f32),
                }
                .expect("in-memory WAV sample");
            }
        }
        writer.finalize().expect("in-memory WAV finalize");
    }
    cursor.into_inner()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pcm16_bytes(samples: &[i16], channels: u16) -> Vec<u8> {
        let spec = WavSpec {
            channels,
            sample_rate: 16000,
            bits_per_sample: 16,
            sample_format: HoundFormat::Int,
        };
        let mut cursor = Cursor::new(Vec::new());
        let mut w = WavWriter::new(&mut cursor, spec).unwrap();
        for &s in samples {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
        cursor.into_inner()
    }

    #[test]
    fn pcm16_scaling() {
        let buf = read_wav(&pcm16_bytes(&[0, 16384, -32768], 1)).unwrap();
        assert_eq!(buf.channel(0), &[0.0, 0.5, -1.0]);
    }

    #[test]
    fn write_pcm16_inverse_and_clamp() {
        let buf = AudioBuffer::mono(16000, vec![0.0, 0.5, -1.0, 1.5, -3.0]).unwrap();
        let bytes = write_wav(&buf, SampleFormat::Pcm16);
        let ints: Vec<i16> = WavReader::new(Cursor::new(&bytes))
            .unwrap()
            .into_samples::<i16>()
            .map(|s| s.unwrap())
            .collect();
        assert_eq!(ints, vec![0, 16384, -32768, 32767, -32768]);
    }

    #[test]
    fn float32_stereo_passthrough() {
        let l: Vec<f64> = [0.25f32, -0.125, 0.3].iter().map(|&v| v as f64).collect();
        let r: Vec<f64> = [0.1f32, 2.5, -0.7].iter().map(|&v| v as f64).collect();
        let buf = AudioBuffer::stereo(44100, l, r).unwrap();
        let back = read_wav(&write_wav(&buf, SampleFormat::Float32)).unwrap();
        assert_eq!(back, buf);
    }

    #[test]
    fn rejects_24_bit() {
        let spec = WavSpec {
            channels: 1,
            sample_rate: 48000,
            bits_per_sample: 24,
            sample_format: HoundFormat::Int,
        };
        let mut cursor = Cursor::new(Vec::new());
        let mut w = WavWriter::new(&mut cursor, spec).unwrap();
        w.write_sample(1000i32).unwrap();
        w.finalize().unwrap();
        assert!(matches!(
            read_wav(&cursor.into_inner()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn rejects_three_channels() {
        let bytes = pcm16_bytes(&[0, 0, 0], 3);
        assert!(matches!(read_wav(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_is_parse_error() {
        let bytes = pcm16_bytes(&[1, 2, 3, 4, 5, 6, 7, 8], 1);
        let cut = &bytes[..bytes.len() - 5];
        assert!(matches!(read_wav(cut), Err(Error::Parse(_))));
        assert!(matches!(read_wav(&bytes[..20]), Err(Error::Parse(_))));
        assert!(matches!(read_wav(b"not a wav"), Err(Error::Parse(_))));
    }
}
