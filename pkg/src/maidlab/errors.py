"""Exception hierarchy.

Every error carries a short machine-parsable ``code`` and a process exit
status so the CLI can report failures on one line.
"""

from __future__ import annotations


class MaidlabError(Exception):
    code = "Error"
    exit_status = 1


# -- model construction -------------------------------------------------------

class CycleDetected(MaidlabError):
    code = "CycleDetected"
    exit_status = 10


class UtilityHasChild(MaidlabError):
    code = "UtilityHasChild"
    exit_status = 11


class CptRowNotNormalized(MaidlabError):
    code = "CptRowNotNormalized"
    exit_status = 12


class MissingCptRow(MaidlabError):
    code = "MissingCptRow"
    exit_status = 13


class UnknownParent(MaidlabError):
    code = "UnknownParent"
    exit_status = 14


class InvalidNode(MaidlabError):
    code = "InvalidNode"
    exit_status = 15


class UnknownAgent(MaidlabError):
    code = "UnknownAgent"
    exit_status = 16


class ParseError(MaidlabError):
    code = "ParseError"
    exit_status = 17


# -- strategies and inference -------------------------------------------------

class RuleDomainMismatch(MaidlabError):
    code = "RuleDomainMismatch"
    exit_status = 20


class UnassignedDecision(MaidlabError):
    code = "UnassignedDecision"
    exit_status = 21


class PartialProfile(MaidlabError):
    code = "PartialProfile"
    exit_status = 22


# -- graph analysis -----------------------------------------------------------

class NotAPath(MaidlabError):
    code = "NotAPath"
    exit_status = 30


class NodeInEvidence(MaidlabError):
    code = "NodeInEvidence"
    exit_status = 31


class NotADecision(MaidlabError):
    code = "NotADecision"
    exit_status = 32


# -- equilibrium search -------------------------------------------------------

class GridTooLarge(MaidlabError):
    code = "GridTooLarge"
    exit_status = 40


class MixedOwnership(MaidlabError):
    code = "MixedOwnership"
    exit_status = 41


class IncompleteContext(MaidlabError):
    code = "IncompleteContext"
    exit_status = 42


class BlockTooLarge(MaidlabError):
    code = "BlockTooLarge"
    exit_status = 43


class NoEquilibriumFound(MaidlabError):
    code = "NoEquilibriumFound"
    exit_status = 44


# -- interventions ------------------------------------------------------------

class TargetNotDecision(MaidlabError):
    code = "TargetNotDecision"
    exit_status = 50


class GuidanceNotFlagged(MaidlabError):
    code = "GuidanceNotFlagged"
    exit_status = 51


class IdCollision(MaidlabError):
    code = "IdCollision"
    exit_status = 52


# -- Markov games -------------------------------------------------------------

class UnrollTooLarge(MaidlabError):
    code = "UnrollTooLarge"
    exit_status = 60


class UnknownParadigm(MaidlabError):
    code = "UnknownParadigm"
    exit_status = 61


# -- environments and training ------------------------------------------------

class IllegalAction(MaidlabError):
    code = "IllegalAction"
    exit_status = 70


class WrongTeamSize(MaidlabError):
    code = "WrongTeamSize"
    exit_status = 71


class InvalidEnv(MaidlabError):
    code = "InvalidEnv"
    exit_status = 72


class SeedCollision(MaidlabError):
    code = "SeedCollision"
    exit_status = 73


class InvalidConfig(MaidlabError):
    code = "InvalidConfig"
    exit_status = 74
