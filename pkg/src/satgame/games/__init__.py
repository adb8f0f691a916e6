from .dating import DatingGame, DatingInstance, dating_satisfying_sets
from .rat import RatGame, RatInstance, rat_throughput
from .resource import (ResourceGame, ResourceInstance, make_resource_instance, read_instance,
                       resource_allocate, write_instance)
from .table import (FixtureGame, TableGame, fixture_games, matching_game, mismatch_game,
                    never_satisfiable_game, random_table_game, universal_clipping_game)

__all__ = [
    "DatingGame", "DatingInstance", "dating_satisfying_sets",
    "RatGame", "RatInstance", "rat_throughput",
    "ResourceGame", "ResourceInstance", "make_resource_instance", "read_instance",
    "resource_allocate", "write_instance",
    "FixtureGame", "TableGame", "fixture_games", "matching_game", "mismatch_game",
    "never_satisfiable_game", "random_table_game", "universal_clipping_game",
]
