#pragma once

#include "polariton/pauli.hpp"
#include "polariton/chem.hpp"
#include "polariton/operators.hpp"
#include "polariton/hamiltonian.hpp"
#include "polariton/exact.hpp"
#include "polariton/circuit.hpp"
#include "polariton/simulator.hpp"
#include "polariton/mitigation.hpp"
#include "polariton/optimizer.hpp"
#include "polariton/vqe.hpp"
