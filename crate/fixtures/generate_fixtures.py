"""Regenerate the circuit-level surface-code DEM fixtures.

Requires `stim` (pip install stim). The rotated memory-Z circuit produced by
stim uses the distance-preserving N/Z two-qubit gate order. Noise follows the
SI1000 superconducting-inspired model with base rate p:

    two-qubit gate          DEPOLARIZE2(p) after
    single-qubit gate       DEPOLARIZE1(p/10) after
    reset                   X_ERROR(2p) after
    measurement             X_ERROR(5p) before
    idle (meas/reset tick)  DEPOLARIZE1(2p)
    idle (other tick)       DEPOLARIZE1(p/10)

Usage: python3 generate_fixtures.py [outdir]
"""

import pathlib
import sys

import stim

ONE_QUBIT = {"H", "S", "S_DAG", "X", "Y", "Z", "SQRT_X", "SQRT_X_DAG"}
TWO_QUBIT = {"CX", "CZ", "CNOT"}
RESETS = {"R", "RZ"}
MEASURES = {"M", "MZ"}
MEASURE_RESETS = {"MR", "MRZ"}
ANNOTATIONS = {"DETECTOR", "OBSERVABLE_INCLUDE", "SHIFT_COORDS", "QUBIT_COORDS"}


def all_qubits(circuit):
    return list(range(circuit.num_qubits))


def noisy_moment(ops, qubits, p):
    out = stim.Circuit()
    touched = set()
    has_meas_or_reset = False
    for op in ops:
        targets = [t.value for t in op.targets_copy() if t.is_qubit_target]
        touched.update(targets)
        if op.name in RESETS | MEASURES | MEASURE_RESETS:
            has_meas_or_reset = True
    for op in ops:
        name = op.name
        targets = [t.value for t in op.targets_copy() if t.is_qubit_target]
        if name in MEASURES:
            out.append("X_ERROR", targets, 5 * p)
            out.append(op)
        elif name in MEASURE_RESETS:
            out.append("X_ERROR", targets, 5 * p)
            out.append(op)
            out.append("X_ERROR", targets, 2 * p)
        elif name in RESETS:
            out.append(op)
            out.append("X_ERROR", targets, 2 * p)
        elif name in ONE_QUBIT:
            out.append(op)
            out.append("DEPOLARIZE1", targets, p / 10)
        elif name in TWO_QUBIT:
            out.append(op)
            out.append("DEPOLARIZE2", targets, p)
        else:
            out.append(op)
    idle = [q for q in qubits if q not in touched]
    if idle and ops and any(op.name not in ANNOTATIONS for op in ops):
        out.append("DEPOLARIZE1", idle, 2 * p if has_meas_or_reset else p / 10)
    return out


def add_si1000(circuit, p, qubits):
    out = stim.Circuit()
    moment = []

    def flush():
        nonlocal moment
        gates = [op for op in moment if op.name not in ANNOTATIONS]
        notes = [op for op in moment if op.name in ANNOTATIONS]
        out.__iadd__(noisy_moment(gates, qubits, p))
        for op in notes:
            out.append(op)
        moment = []

    for inst in circuit:
        if isinstance(inst, stim.CircuitRepeatBlock):
            flush()
            body = add_si1000(inst.body_copy(), p, qubits)
            out.append(stim.CircuitRepeatBlock(inst.repeat_count, body))
        elif inst.name == "TICK":
            flush()
            out.append("TICK")
        else:
            moment.append(inst)
    flush()
    return out


def main():
    outdir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).parent)
    p = 0.001
    for d in (3, 5):
        base = stim.Circuit.generated("surface_code:rotated_memory_z", distance=d, rounds=d)
        noisy = add_si1000(base, p, all_qubits(base))
        dem = noisy.detector_error_model(decompose_errors=False)
        path = outdir / f"surface_d{d}_nz_si1000_p{p}.dem"
        header = (
            f"# rotated surface code memory-Z, d={d}, rounds={d}, N-Z schedule, SI1000 p={p}\n"
            f"# generated with stim {stim.__version__}\n"
            f"# num_detectors={dem.num_detectors} num_observables={dem.num_observables} "
            f"num_errors={dem.num_errors}\n"
        )
        path.write_text(header + str(dem) + "\n")
        print(path, dem.num_detectors, dem.num_observables, dem.num_errors)


if __name__ == "__main__":
    main()
