"""The five-item case-study sprint used as the reference fixture.

The values are written out as the row-shaped tables they were recorded in so
they can be compared cell by cell.
"""

from __future__ import annotations

from datetime import date

from pbr.model import PblItem, PclScore, Sprint, TarScore, Team

SPRINT_ID = "S-case-study"
TEAM_ID = "softwarepeople"
START = date(2013, 3, 4)
LENGTH_DAYS = 15  # three working weeks

PCL_IDS = ("CBLBP", "NTD", "TE", "PID", "PED", "TEC", "LGUI", "BA")
TAR_IDS = ("BC", "SB", "BFRI", "NBMTC", "RC", "TC")

TITLES = {
    "PBL1": "Text Bank import/export via predefined Excel documents",
    "PBL2": "User configurable status colours in activity search",
    "PBL3": "Time zone and date format from user settings",
    "PBL4": "Theme and Campaign fields and search in the Text Bank",
    "PBL5": "Changeable country for an Activity",
}

# item -> (factor values, weights)
PCL_TABLE = {
    "PBL1": (("5", "5", "5", "4.5", "5", "5", "5", "5"),
             ("1", "1", "1", "1", "1", "1", "0.4", "1")),
    "PBL2": (("3", "4", "3", "3.5", "4", "3", "4", "2"),
             ("0.7", "1", "0.6", "0.8", "0.7", "0.5", "0.7", "0.6")),
    # BA weight 0.4: the only weight matching the 0.8 factor rating (2 x 0.4)
    # and the 3.62 PCL; a printed 0.49 would give 3.59.
    "PBL3": (("3", "3", "4", "3", "3", "4", "5", "2"),
             ("0.7", "0.7", "1", "0.5", "0.5", "1", "1", "0.4")),
    "PBL4": (("2", "2.5", "2.5", "2", "3", "2.5", "2.5", "2"),
             ("0.6", "0.7", "0.8", "0.6", "0.8", "0.8", "0.6", "0.5")),
    "PBL5": (("5", "4", "5", "4", "3", "5", "3", "5"),
             ("1", "1", "0.7", "0.8", "0.5", "1", "0.7", "1")),
}

TAR_TABLE = {
    "PBL1": ("5", "5", "2", "3", "2", "3.5"),
    "PBL2": ("4", "2", "5", "5", "5", "4.5"),
    "PBL3": ("5", "3", "5", "5", "5", "4.5"),
    "PBL4": ("4", "2.5", "4", "3", "5", "3.75"),
    "PBL5": ("2", "5", "3", "2", "1", "2.5"),
}

# the tables' own PCL / TAR cells
PRINTED_PCL = {"PBL1": "4.93", "PBL2": "3.39", "PBL3": "3.62", "PBL4": "2.42", "PBL5": "4.37"}
PRINTED_TAR = {"PBL1": "3.41", "PBL2": "4.25", "PBL3": "4.58", "PBL4": "3.70", "PBL5": "2.58"}


def case_study_items() -> tuple[PblItem, ...]:
    items = []
    for item_id, (values, weights) in PCL_TABLE.items():
        items.append(PblItem(
            id=item_id,
            title=TITLES[item_id],
            pcl_scores=tuple(PclScore(f, v, w) for f, v, w in zip(PCL_IDS, values, weights)),
            tar_scores=tuple(TarScore(f, v) for f, v in zip(TAR_IDS, TAR_TABLE[item_id])),
        ))
    return tuple(items)


def case_study_sprint() -> Sprint:
    return Sprint(SPRINT_ID, TEAM_ID, START, LENGTH_DAYS, items=case_study_items())


def case_study_team() -> Team:
    return Team(TEAM_ID, "SoftwarePeople", (SPRINT_ID,))
