import typer

from src.ilp.router import gen as GenRouter
from src.ilp.router import router as IlpRouter
from src.logic.router import router as LogicRouter
from src.mechanism.router import oracle as OracleRouter
from src.mechanism.router import router as MechanismRouter
from src.mechanism.router import verify as VerifyRouter
from src.model.router import router as ModelRouter
from src.valuation.router import router as ValuationRouter

app = typer.Typer(
    name="sociallaw",
    help="Profit-optimal social laws: model checking, valuation, allocation programs, "
         "threshold payments and their verification.",
    no_args_is_help=True,
    pretty_exceptions_enable=False,
)


def include_router(router: typer.Typer) -> None:
    app.registered_commands.extend(router.registered_commands)
    app.registered_groups.extend(router.registered_groups)


include_router(LogicRouter)
include_router(ValuationRouter)
include_router(ModelRouter)
include_router(MechanismRouter)
include_router(IlpRouter)

app.add_typer(VerifyRouter, name="verify")
app.add_typer(OracleRouter, name="oracle")
app.add_typer(GenRouter, name="gen")


if __name__ == "__main__":
    app()
