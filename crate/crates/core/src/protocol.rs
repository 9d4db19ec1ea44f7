//! Fusion-center coordination: who illuminates what, who listens, and the
//! sensing campaign that fills the per-receiver sample store.

use serde::Serialize;

use crate::beamforming::{receivers, BeamformerTable};
use crate::channel::Scene;
use crate::estimation::{local_statistic, PhaseTable};
use crate::exec::{try_map_indexed, Exec};
use crate::geometry::{CellAssignment, GridSpec};
use crate::rng::StreamKey;
use crate::signal::{
    generate_frame, remove_data, subtract_known_clutter, ClutterTable, NoiseSpec, SymbolBlock,
};
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub time: usize,
    pub illuminator: usize,
    pub cell: usize,
    pub receivers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportSlot {
    pub time: usize,
    pub uav: usize,
}

/// Time-ordered illumination slots followed by one reporting slot per UAV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub uav_count: usize,
    pub full_duplex: bool,
    pub slots: Vec<Slot>,
    pub reports: Vec<ReportSlot>,
}

/// One sensing slot per cell ordered by `(UAV, cell)`; every other UAV listens.
/// With `full_duplex` the illuminator also listens to its own cell.
pub fn build_schedule(
    assignment: &CellAssignment,
    grid: &GridSpec,
    full_duplex: bool,
) -> Result<Schedule> {
    if assignment.owner.len() != grid.len() {
        return Err(Error::InvalidSchedule(format!(
            "assignment covers {} cells, grid has {}",
            assignment.owner.len(),
            grid.len()
        )));
    }
    // re-validate the partition
    let assignment = CellAssignment::from_sets(assignment.sets.clone(), grid.len())?;
    let uav_count = assignment.uav_count();
    let mut slots = Vec::with_capacity(grid.len());
    for (u, set) in assignment.sets.iter().enumerate() {
        for &p in set {
            slots.push(Slot {
                time: slots.len(),
                illuminator: u,
                cell: p,
                receivers: receivers(uav_count, u, full_duplex).collect(),
            });
        }
    }
    let reports = (0..uav_count)
        .map(|u| ReportSlot {
            time: slots.len() + u,
            uav: u,
        })
        .collect();
    let schedule = Schedule {
        uav_count,
        full_duplex,
        slots,
        reports,
    };
    schedule.validate(grid.len())?;
    Ok(schedule)
}

impl Schedule {
    pub fn validate(&self, cell_count: usize) -> Result<()> {
        let mut covered = vec![false; cell_count];
        for s in &self.slots {
            *covered
                .get_mut(s.cell)
                .ok_or(Error::UnknownCell(s.cell))? = true;
            if !self.full_duplex && s.receivers.contains(&s.illuminator) {
                return Err(Error::InvalidSchedule(format!(
                    "UAV {} transmits and receives in slot {}",
                    s.illuminator, s.time
                )));
            }
        }
        if let Some(p) = covered.iter().position(|c| !c) {
            return Err(Error::InvalidSchedule(format!("cell {p} is never illuminated")));
        }
        let mut times: Vec<usize> = self.slots.iter().map(|s| s.time).collect();
        times.extend(self.reports.iter().map(|r| r.time));
        let n = times.len();
        times.sort_unstable();
        times.dedup();
        if times.len() != n {
            return Err(Error::InvalidSchedule("overlapping slots".into()));
        }
        Ok(())
    }

    /// Slot list as pretty-printed JSON.
    pub fn to_text(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }
}

/// Clutter-subtracted, data-free blocks per `(receiver, cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStore {
    pub uav_count: usize,
    pub cell_count: usize,
    blocks: Vec<Option<SymbolBlock>>,
    /// Number of blocks whose ground fidelity differed from the subtracted term.
    pub fidelity_mismatches: usize,
}

impl SampleStore {
    pub fn get(&self, rx: usize, cell: usize) -> Option<&SymbolBlock> {
        self.blocks
            .get(cell * self.uav_count + rx)
            .and_then(|b| b.as_ref())
    }

    pub fn observed_cells(&self, rx: usize) -> Vec<usize> {
        (0..self.cell_count)
            .filter(|&p| self.get(rx, p).is_some())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sufficient statistics `delta` per `(receiver, cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticStore {
    pub uav_count: usize,
    pub cell_count: usize,
    deltas: Vec<Option<Complex64>>,
}

impl StatisticStore {
    pub fn new(uav_count: usize, cell_count: usize) -> Self {
        Self {
            uav_count,
            cell_count,
            deltas: vec![None; uav_count * cell_count],
        }
    }

    pub fn get(&self, rx: usize, cell: usize) -> Option<Complex64> {
        self.deltas.get(cell * self.uav_count + rx).copied().flatten()
    }

    pub fn set(&mut self, rx: usize, cell: usize, delta: Complex64) {
        self.deltas[cell * self.uav_count + rx] = Some(delta);
    }

    /// Reduces every stored block with its phase reference.
    pub fn from_samples(store: &SampleStore, phases: &PhaseTable) -> Result<Self> {
        let mut out = Self::new(store.uav_count, store.cell_count);
        for p in 0..store.cell_count {
            for rx in 0..store.uav_count {
                if let Some(b) = store.get(rx, p) {
                    let phase = phases.get(rx, p).ok_or_else(|| {
                        Error::Estimation(format!("no phase reference for rx {rx}, cell {p}"))
                    })?;
                    out.set(rx, p, local_statistic(b, phase)?);
                }
            }
        }
        Ok(out)
    }
}

/// Immutable inputs shared by every slot of a campaign.
#[derive(Debug, Clone, Copy)]
pub struct Campaign<'a> {
    pub scene: &'a Scene,
    pub schedule: &'a Schedule,
    pub beamformers: &'a BeamformerTable,
    /// Ground responses used to synthesize the echoes.
    pub synthesis_clutter: &'a ClutterTable,
    /// Ground responses the receivers subtract.
    pub known_clutter: &'a ClutterTable,
    pub noise: NoiseSpec,
}

impl Campaign<'_> {
    fn check(&self) -> Result<()> {
        if self.schedule.full_duplex != self.beamformers.full_duplex() {
            return Err(Error::InvalidSchedule(
                "schedule and beamformer table disagree on duplex mode".into(),
            ));
        }
        if self.schedule.uav_count != self.scene.uavs.len() {
            return Err(Error::InvalidSchedule("schedule does not match the scene".into()));
        }
        Ok(())
    }

    /// Runs one slot: draws the frame, then synthesizes and cleans one block per receiver.
    fn run_slot(&self, slot: &Slot, key: StreamKey) -> Result<Vec<(usize, SymbolBlock, bool)>> {
        let mut rng = key.child(slot.time as u64).rng();
        let frame = generate_frame(&self.scene.waveform, &mut rng);
        let mut out = Vec::with_capacity(slot.receivers.len());
        for &rx in &slot.receivers {
            let pair = self.beamformers.get(slot.illuminator, rx, slot.cell)?;
            let missing = || Error::MissingBeamformer {
                tx: slot.illuminator,
                rx,
                cell: slot.cell,
            };
            let synth = self.synthesis_clutter.get(rx, slot.cell).ok_or_else(missing)?;
            let known = self.known_clutter.get(rx, slot.cell).ok_or_else(missing)?;
            let received = crate::signal::synthesize_received(
                self.scene, pair, slot.cell, &frame, synth, &self.noise, &mut rng,
            )?;
            let sub = subtract_known_clutter(&remove_data(&received, &frame)?, known);
            out.push((rx, sub.block, sub.fidelity_mismatch));
        }
        Ok(out)
    }
}

/// Executes every sensing slot and keeps the cleaned blocks.
pub fn run_campaign(campaign: &Campaign, key: StreamKey, exec: Exec) -> Result<SampleStore> {
    campaign.check()?;
    let slots = &campaign.schedule.slots;
    let per_slot = try_map_indexed(exec, slots.len(), |i| campaign.run_slot(&slots[i], key))?;
    let uav_count = campaign.schedule.uav_count;
    let cell_count = campaign.scene.grid.len();
    let mut blocks = vec![None; uav_count * cell_count];
    let mut fidelity_mismatches = 0;
    for (slot, results) in slots.iter().zip(per_slot) {
        for (rx, block, mismatch) in results {
            fidelity_mismatches += usize::from(mismatch);
            blocks[slot.cell * uav_count + rx] = Some(block);
        }
    }
    Ok(SampleStore {
        uav_count,
        cell_count,
        blocks,
        fidelity_mismatches,
    })
}

/// Same campaign as [`run_campaign`], reducing each block to its statistic as
/// soon as it is produced. Identical random streams, so the statistics equal
/// those of the full store.
pub fn collect_statistics(
    campaign: &Campaign,
    phases: &PhaseTable,
    key: StreamKey,
    exec: Exec,
) -> Result<StatisticStore> {
    campaign.check()?;
    let slots = &campaign.schedule.slots;
    let per_slot = try_map_indexed(exec, slots.len(), |i| -> Result<Vec<(usize, Complex64)>> {
        let slot = &slots[i];
        campaign
            .run_slot(slot, key)?
            .into_iter()
            .map(|(rx, block, _)| {
                let phase = phases.get(rx, slot.cell).ok_or_else(|| {
                    Error::Estimation(format!("no phase reference for rx {rx}, cell {}", slot.cell))
                })?;
                Ok((rx, local_statistic(&block, phase)?))
            })
            .collect()
    })?;
    let mut out = StatisticStore::new(campaign.schedule.uav_count, campaign.scene.grid.len());
    for (slot, results) in slots.iter().zip(per_slot) {
        for (rx, delta) in results {
            out.set(rx, slot.cell, delta);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::BeamformerConfig;
    use crate::channel::{ClutterFidelity, Target};
    use crate::geometry::{
        assign_cells, build_grid, place_uavs, place_uavs_in_row, ArraySpec, GridKind,
    };
    use crate::signal::WaveformSpec;
    use crate::Vec3;

    fn scene(l: usize, u: usize, kind: GridKind) -> Scene {
        Scene {
            grid: build_grid(50.0, l, kind).unwrap(),
            uavs: place_uavs(u, 50.0, 100.0).or_else(|_| place_uavs_in_row(u, 50.0, 100.0)).unwrap(),
            array: ArraySpec::new(4).unwrap(),
            waveform: WaveformSpec::new(4, 16, 200e6).unwrap(),
            target: Target {
                position: Vec3::new(20.0, 30.0, 0.0),
                rcs: 10.0,
                doppler: 0.0,
            },
            ground_rcs: 25.0,
            pathloss_exponent: 2.0,
            carrier_hz: 24e9,
            light_speed: 299_792_458.0,
        }
    }

    #[test]
    fn benchmark_schedule_is_degenerate() {
        let s = scene(4, 1, GridKind::Mixed);
        let asg = assign_cells(&s.grid, &s.uavs).unwrap();
        let half = build_schedule(&asg, &s.grid, false).unwrap();
        assert!(half.slots.iter().all(|sl| sl.receivers.is_empty()));
        let full = build_schedule(&asg, &s.grid, true).unwrap();
        assert!(full.slots.iter().all(|sl| sl.receivers == vec![0]));
    }

    #[test]
    fn slot_count_full_mixed_grid() {
        let grid = build_grid(50.0, 18, GridKind::Mixed).unwrap();
        let uavs = place_uavs(9, 50.0, 100.0).unwrap();
        let asg = assign_cells(&grid, &uavs).unwrap();
        let sch = build_schedule(&asg, &grid, false).unwrap();
        assert_eq!(sch.slots.len(), 613);
        assert_eq!(sch.reports.len(), 9);
        let mut seen = vec![0; 613];
        for s in &sch.slots {
            seen[s.cell] += 1;
            assert!(!s.receivers.contains(&s.illuminator));
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn non_partition_is_rejected() {
        let grid = build_grid(50.0, 2, GridKind::Base).unwrap();
        let bad = CellAssignment {
            owner: vec![0, 0, 1, 1],
            sets: vec![vec![0, 1, 2], vec![2, 3]],
        };
        assert!(build_schedule(&bad, &grid, false).is_err());
        let gap = CellAssignment {
            owner: vec![0, 0, 1, 1],
            sets: vec![vec![0, 1], vec![3]],
        };
        assert!(build_schedule(&gap, &grid, false).is_err());
    }

    fn setup(
        s: &Scene,
        asg: &CellAssignment,
        full_duplex: bool,
    ) -> (Schedule, BeamformerTable, ClutterTable, PhaseTable) {
        let sch = build_schedule(asg, &s.grid, full_duplex).unwrap();
        let bf = BeamformerTable::build(s, asg, &BeamformerConfig::default(), full_duplex, Exec::Sequential).unwrap();
        let ct = ClutterTable::build(s, &bf, 1, ClutterFidelity::CenterSubcarrier, Exec::Sequential).unwrap();
        let ph = PhaseTable::build(s, asg, full_duplex).unwrap();
        (sch, bf, ct, ph)
    }

    #[test]
    fn half_duplex_bookkeeping() {
        let s = scene(2, 2, GridKind::Base);
        let asg = CellAssignment::from_sets(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let (sch, bf, ct, _) = setup(&s, &asg, false);
        let c = Campaign {
            scene: &s,
            schedule: &sch,
            beamformers: &bf,
            synthesis_clutter: &ct,
            known_clutter: &ct,
            noise: NoiseSpec::from_dbm(-109.0),
        };
        let store = run_campaign(&c, StreamKey::root(5), Exec::Sequential).unwrap();
        assert_eq!(store.observed_cells(0), vec![2, 3]);
        assert_eq!(store.observed_cells(1), vec![0, 1]);
        assert_eq!(store.len(), 4);
    }

    #[test]
    fn full_duplex_benchmark_store() {
        let s = scene(3, 1, GridKind::Mixed);
        let asg = assign_cells(&s.grid, &s.uavs).unwrap();
        let (sch, bf, ct, _) = setup(&s, &asg, true);
        let c = Campaign {
            scene: &s,
            schedule: &sch,
            beamformers: &bf,
            synthesis_clutter: &ct,
            known_clutter: &ct,
            noise: NoiseSpec::from_dbm(-109.0),
        };
        let store = run_campaign(&c, StreamKey::root(5), Exec::Sequential).unwrap();
        assert_eq!(store.observed_cells(0).len(), s.grid.len());
    }

    #[test]
    fn store_invariant_and_determinism() {
        let s = scene(4, 4, GridKind::Mixed);
        let asg = assign_cells(&s.grid, &s.uavs).unwrap();
        let (sch, bf, ct, ph) = setup(&s, &asg, false);
        let c = Campaign {
            scene: &s,
            schedule: &sch,
            beamformers: &bf,
            synthesis_clutter: &ct,
            known_clutter: &ct,
            noise: NoiseSpec::from_dbm(-109.0),
        };
        let a = run_campaign(&c, StreamKey::root(11), Exec::Sequential).unwrap();
        let b = run_campaign(&c, StreamKey::root(11), Exec::Parallel).unwrap();
        assert_eq!(a, b);
        for u in 0..4 {
            let mut expect: Vec<usize> = (0..s.grid.len()).filter(|p| asg.owner[*p] != u).collect();
            expect.sort_unstable();
            assert_eq!(a.observed_cells(u), expect);
        }
        // streaming statistics equal the reduced store
        let direct = StatisticStore::from_samples(&a, &ph).unwrap();
        let streamed = collect_statistics(&c, &ph, StreamKey::root(11), Exec::Parallel).unwrap();
        assert_eq!(direct, streamed);
    }

    #[test]
    fn schedule_text_lists_slots() {
        let s = scene(2, 4, GridKind::Base);
        let asg = assign_cells(&s.grid, &s.uavs).unwrap();
        let sch = build_schedule(&asg, &s.grid, false).unwrap();
        let v: serde_json::Value = serde_json::from_str(&sch.to_text()).unwrap();
        assert_eq!(v["slots"].as_array().unwrap().len(), 4);
        assert_eq!(v["reports"].as_array().unwrap().len(), 4);
    }
}
