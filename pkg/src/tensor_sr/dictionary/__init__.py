from .joint import JointProblem, stack_problem, joint_objective  # noqa: F401
from .joint import stack_dictionary, unstack_dictionary           # noqa: F401
from .dual import DualState, DualResult, solve_dual, dict_slice_update, dual_value  # noqa: F401
from .learn import TrainingMeta, DictionaryPair, DictionaryUpdate  # noqa: F401
from .learn import dictionary_update, learn_dictionary, train_dictionaries  # noqa: F401
