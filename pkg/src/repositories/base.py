from abc import ABC
from typing import TypeVar, Generic, List, Optional, Type
from sqlalchemy.orm import Session
from sqlalchemy import select, func, delete

T = TypeVar('T')


class BaseRepository(Generic[T], ABC):
    """Base repository providing common CRUD operations"""

    def __init__(self, session: Session, model_class: Type[T]):
        self.session = session
        self.model_class = model_class

    def create(self, entity: T) -> T:
        """Create a new entity in the database"""
        self.session.add(entity)
        self.session.commit()
        self.session.refresh(entity)
        return entity

    def get_by_id(self, entity_id: int) -> Optional[T]:
        """Get an entity by its ID"""
        return self.session.get(self.model_class, entity_id)

    def delete(self, entity_id: int) -> bool:
        """Delete an entity by its ID"""
        entity = self.session.get(self.model_class, entity_id)
        if entity:
            self.session.delete(entity)
            self.session.commit()
            return True
        return False

    def list_all(self) -> List[T]:
        """Get all entities"""
        return list(self.session.execute(select(self.model_class)).scalars().all())

    def count(self) -> int:
        """Count all entities"""
        return self.session.execute(select(func.count(self.model_class.id))).scalar()

    def bulk_delete(self, entity_ids: List[int]) -> int:
        """Delete multiple entities by their IDs"""
        result = self.session.execute(
            delete(self.model_class).where(self.model_class.id.in_(entity_ids))
        )
        self.session.commit()
        return result.rowcount
