//! Non-adaptive direct detection and conditional pulse nulling as
//! [`Receiver`]s over unsliced slots.

use crate::error::{domain, Result};
use crate::optics::MeasurementSetting;
use crate::ppm::{ClickProbs, Decision, ObservationModel, Receiver};

pub(crate) fn require_unsliced(model: &ObservationModel, what: &str) -> Result<()> {
    if model.slices() != 1 {
        return Err(domain(
            "slices_per_slot",
            format!("{what} works on whole slots, got {} slices", model.slices()),
        ));
    }
    Ok(())
}

/// Same setting on every slot, uniform choice among clicked slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectDetection {
    pub setting: MeasurementSetting,
}

impl Receiver for DirectDetection {
    type State = Vec<usize>;

    fn start(&self, model: &ObservationModel) -> Result<Self::State> {
        require_unsliced(model, "direct detection")?;
        Ok(Vec::new())
    }

    fn prepare(
        &self,
        _: &ObservationModel,
        _: &mut Self::State,
        _: usize,
    ) -> Result<MeasurementSetting> {
        Ok(self.setting)
    }

    fn observe(
        &self,
        _: &ObservationModel,
        clicked: &mut Self::State,
        index: usize,
        click: bool,
        _: &ClickProbs,
    ) -> Result<()> {
        if click {
            clicked.push(index);
        }
        Ok(())
    }

    fn decide(&self, model: &ObservationModel, clicked: &Self::State) -> Decision {
        match clicked.len() {
            0 => Decision::UniformAmong((0..model.slots()).collect()),
            1 => Decision::Slot(clicked[0]),
            _ => Decision::UniformAmong(clicked.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CpnState {
    hypothesis: usize,
    nulling: bool,
}

/// Conditional pulse nulling, see [`cpn_error_closed_form`](super::cpn_error_closed_form).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cpn {
    pub null_setting: MeasurementSetting,
}

impl Receiver for Cpn {
    type State = CpnState;

    fn start(&self, model: &ObservationModel) -> Result<Self::State> {
        require_unsliced(model, "pulse nulling")?;
        Ok(CpnState {
            hypothesis: 0,
            nulling: true,
        })
    }

    fn prepare(
        &self,
        _: &ObservationModel,
        state: &mut Self::State,
        _: usize,
    ) -> Result<MeasurementSetting> {
        Ok(if state.nulling {
            self.null_setting
        } else {
            MeasurementSetting::NONE
        })
    }

    fn observe(
        &self,
        model: &ObservationModel,
        state: &mut Self::State,
        index: usize,
        click: bool,
        _: &ClickProbs,
    ) -> Result<()> {
        if state.nulling {
            if !click {
                state.nulling = false;
            } else if index + 1 < model.slots() {
                state.hypothesis = index + 1;
            }
        } else if click {
            state.hypothesis = index;
        }
        Ok(())
    }

    fn decide(&self, _: &ObservationModel, state: &Self::State) -> Decision {
        Decision::Slot(state.hypothesis)
    }
}
