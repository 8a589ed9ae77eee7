use std::io::Write;

use super::body::BodyState;
use super::real::Real;
use crate::error::{Error, Result};

/// One named signal, `width` components per step.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel<S> {
    pub name: String,
    pub width: usize,
    /// Values at step 0 (before the first integration step).
    pub initial: Vec<S>,
    /// Steps 1..=H, row-major: `data[(step - 1) * width + component]`.
    pub data: Vec<S>,
}

impl<S: Real> Channel<S> {
    pub fn new(name: impl Into<String>, width: usize, horizon: usize) -> Self {
        Channel {
            name: name.into(),
            width,
            initial: Vec::with_capacity(width),
            data: Vec::with_capacity(width * horizon),
        }
    }

    pub fn steps(&self) -> usize {
        self.data.len() / self.width
    }

    /// Components at step `tau` (1-based).
    pub fn at(&self, tau: usize) -> &[S] {
        &self.data[(tau - 1) * self.width..tau * self.width]
    }

    pub fn last(&self) -> &[S] {
        self.at(self.steps())
    }

    pub fn push(&mut self, values: &[S]) {
        debug_assert_eq!(values.len(), self.width);
        self.data.extend_from_slice(values);
    }
}

/// Per-step simulator signals of one rollout.
#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub horizon: usize,
    pub channels: Vec<Channel<S>>,
    /// Full body states per step, only when requested.
    pub bodies: Option<Vec<Vec<BodyState<S>>>>,
}

impl<S: Real> Trajectory<S> {
    pub fn new(horizon: usize, channels: Vec<Channel<S>>) -> Result<Self> {
        for c in &channels {
            if c.steps() != horizon || c.data.len() != horizon * c.width {
                return Err(Error::HorizonMismatch(horizon, c.steps()));
            }
        }
        Ok(Trajectory {
            horizon,
            channels,
            bodies: None,
        })
    }

    pub fn channel(&self, name: &str) -> Result<&Channel<S>> {
        self.channels
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::MissingChannel(name.to_string()))
    }

    /// Drops tangents.
    pub fn values(&self) -> Trajectory<f64> {
        let channels = self
            .channels
            .iter()
            .map(|c| Channel {
                name: c.name.clone(),
                width: c.width,
                initial: c.initial.iter().map(Real::value).collect(),
                data: c.data.iter().map(Real::value).collect(),
            })
            .collect();
        Trajectory {
            horizon: self.horizon,
            channels,
            bodies: None,
        }
    }

    /// CSV with columns `step,channel,value,d0..d{dim-1}`; vector channels
    /// are written one component per row as `name[k]`.
    pub fn write_csv<W: Write>(&self, mut out: W, dim: usize) -> std::io::Result<()> {
        write!(out, "step,channel,value")?;
        for k in 0..dim {
            write!(out, ",d{k}")?;
        }
        writeln!(out)?;
        for tau in 0..=self.horizon {
            for c in &self.channels {
                let row = if tau == 0 { &c.initial[..] } else { c.at(tau) };
                for (k, v) in row.iter().enumerate() {
                    if c.width == 1 {
                        write!(out, "{tau},{},{}", c.name, v.value())?;
                    } else {
                        write!(out, "{tau},{}[{k}],{}", c.name, v.value())?;
                    }
                    for t in v.tangent_row(dim) {
                        write!(out, ",{t}")?;
                    }
                    writeln!(out)?;
                }
            }
        }
        Ok(())
    }
}
